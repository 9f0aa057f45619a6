"""Complex Hilbert-space primitives for 2- and 4-dimensional problems.

Vectors are stored rectangular (complex ndarray) internally; the canonical
external representation is polar — amplitude >= 0 with phase in degrees in
[0, 360) — because that is how measurement bases are written down and
exchanged in data files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Processing order used when re-orthonormalizing a four-outcome basis:
# outcomes (1,1), (1,2), (2,2), (2,1).  Gram-Schmidt output depends on the
# order in which near-orthonormal vectors are visited; this order is the
# calibrated package-wide convention for repairing rounded bases.
REPAIR_ORDER = (0, 1, 3, 2)

_ALLOWED_DIMS = (2, 4)


class ConvergenceError(RuntimeError):
    """Iterative routine failed to reach its tolerance; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _values(x) -> np.ndarray:
    """Coerce a CVec/CMat or array-like to a complex ndarray."""
    if isinstance(x, (CVec, CMat)):
        return x.values
    return np.asarray(x, dtype=complex)


@dataclass
class CVec:
    """A complex vector of dimension 2 or 4.

    Attributes
    ----------
    values : np.ndarray
        Rectangular complex components.
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.values.shape[0] not in _ALLOWED_DIMS:
            raise ValueError(f"CVec dimension must be 2 or 4, got {self.values.shape[0]}")

    @classmethod
    def from_polar_deg(cls, amplitudes, phases_deg) -> "CVec":
        """Build a vector from amplitudes >= 0 and phases in degrees."""
        amps = np.asarray(amplitudes, dtype=float)
        phs = np.asarray(phases_deg, dtype=float)
        if amps.shape != phs.shape:
            raise ValueError("amplitudes and phases must have the same length")
        if np.any(amps < 0):
            raise ValueError("amplitudes must be nonnegative")
        return cls(amps * np.exp(1j * np.radians(phs)))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phases_deg(self) -> np.ndarray:
        """Phases in [0, 360); zero-amplitude entries report phase 0."""
        phases = np.degrees(np.angle(self.values)) % 360.0
        return np.where(np.abs(self.values) == 0.0, 0.0, phases)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def is_unit(self, tol: float = 1e-9) -> bool:
        """Whether the norm is within ``tol`` of 1 (0.02 for rounded sources)."""
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "CVec":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return CVec(self.values / n)


@dataclass
class CMat:
    """A complex 2x2 or 4x4 matrix."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("CMat must be square")
        if self.values.shape[0] not in _ALLOWED_DIMS:
            raise ValueError(f"CMat dimension must be 2 or 4, got {self.values.shape[0]}")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.values - self.values.conj().T)) <= tol)

    def is_unitary(self, tol: float = 1e-9) -> bool:
        eye = np.eye(self.dim)
        return bool(np.max(np.abs(self.values.conj().T @ self.values - eye)) <= tol)


@dataclass
class SVDResult:
    """Singular value decomposition M = u @ diag(sigma) @ vh.

    ``sigma`` is nonnegative and sorted descending; ``u`` and ``vh`` have
    orthonormal columns/rows.
    """

    u: np.ndarray
    sigma: np.ndarray
    vh: np.ndarray
    sweeps: int = field(default=0, compare=False)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if np.any(self.sigma < -1e-12):
            raise ValueError("singular values must be nonnegative")
        if np.any(np.diff(self.sigma) > 1e-12):
            raise ValueError("singular values must be sorted descending")

    def reconstruct(self) -> np.ndarray:
        return self.u @ np.diag(self.sigma) @ self.vh

    def rank(self, rank_tol: float = 1e-7) -> int:
        """Number of singular values above ``rank_tol`` relative to the largest."""
        if self.sigma.size == 0 or self.sigma[0] == 0.0:
            return 0
        return int(np.sum(self.sigma > rank_tol * self.sigma[0]))


def tensor(u, v) -> np.ndarray:
    """Tensor product of two vectors, ordered (u1v1, u1v2, u2v1, u2v2)."""
    return np.kron(_values(u), _values(v))


def tensor_op(a, b) -> np.ndarray:
    """Tensor product of two operators in the same component ordering."""
    return np.kron(_values(a), _values(b))


def inner(u, v) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    return complex(np.vdot(_values(u), _values(v)))


def gram(vectors) -> np.ndarray:
    """Gram matrix G[i, j] = <v_i | v_j> of a sequence of vectors."""
    vs = [_values(v) for v in vectors]
    k = len(vs)
    g = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            g[i, j] = np.vdot(vs[i], vs[j])
    return g


def max_abs_diff(a, b) -> float:
    """Largest entrywise modulus of the difference of two arrays."""
    return float(np.max(np.abs(_values(a) - _values(b))))


def orthonormalize(vectors, order=None, tol: float = 1e-6):
    """Gram-Schmidt repair of a near-orthonormal family.

    Vectors are processed in ``order`` (defaults to REPAIR_ORDER for four
    vectors, natural order otherwise) but returned at their original
    positions, so outcome labels keep their meaning.

    Parameters
    ----------
    vectors : sequence of array-like
        Near-orthonormal family.
    order : sequence of int, optional
        Processing order; a permutation of range(len(vectors)).
    tol : float
        A residual norm at or below ``tol`` marks the family as linearly
        dependent beyond repair.

    Returns
    -------
    list of np.ndarray
        Orthonormal vectors, original positions preserved.
    """
    vs = [_values(v) for v in vectors]
    k = len(vs)
    if order is None:
        order = REPAIR_ORDER if k == 4 else tuple(range(k))
    if sorted(order) != list(range(k)):
        raise ValueError("order must be a permutation of the vector indices")
    out: list = [None] * k
    done: list = []
    for idx in order:
        w = vs[idx].copy()
        for u in done:
            w = w - np.vdot(u, w) * u
        residual = np.linalg.norm(w)
        if residual <= tol:
            raise ValueError(
                f"vector {idx} is linearly dependent on the others "
                f"(residual {residual:.3e}); family is beyond repair"
            )
        w = w / residual
        out[idx] = w
        done.append(w)
    return out


def _complete_column(existing: list, dim: int) -> np.ndarray:
    """A unit vector orthogonal to every vector in ``existing``."""
    for k in range(dim):
        w = np.zeros(dim, dtype=complex)
        w[k] = 1.0
        for u in existing:
            w = w - np.vdot(u, w) * u
        n = np.linalg.norm(w)
        if n > 1e-7:
            return w / n
    raise ValueError("could not complete an orthonormal basis")


def svd(matrix, max_sweeps: int = 200, tol: float = 1e-14) -> SVDResult:
    """Singular value decomposition by one-sided complex Jacobi rotations.

    Columns are rotated pairwise until all column pairs are orthogonal to a
    relative tolerance of ``tol``; singular values are the final column
    norms.  Designed for the small dense matrices this package works with
    (2x2 and 4x4); accepts any rectangular complex matrix.

    Parameters
    ----------
    matrix : array-like
        Input matrix M (m x n).
    max_sweeps : int
        Hard cap on full sweeps before giving up.
    tol : float
        Relative off-diagonal threshold |<a_p, a_q>| / (|a_p||a_q|).

    Returns
    -------
    SVDResult
        With u (m x n), sigma (n,), vh (n x n) and M = u @ diag(sigma) @ vh.

    Raises
    ------
    ConvergenceError
        If the sweep cap is hit; the exception carries the residual.
    """
    m_in = _values(matrix)
    if m_in.ndim != 2:
        raise ValueError("svd expects a matrix")
    m, n = m_in.shape
    if m < n:
        # svd(M†) = U Σ V†  →  M = V Σ U†
        flipped = svd(m_in.conj().T, max_sweeps=max_sweeps, tol=tol)
        return SVDResult(
            u=flipped.vh.conj().T,
            sigma=flipped.sigma,
            vh=flipped.u.conj().T,
            sweeps=flipped.sweeps,
        )

    a = m_in.astype(complex).copy()
    v = np.eye(n, dtype=complex)
    sweeps_used = max_sweeps
    residual = 0.0
    for sweep in range(max_sweeps):
        residual = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(np.real(np.vdot(a[:, p], a[:, p])))
                beta = float(np.real(np.vdot(a[:, q], a[:, q])))
                if alpha == 0.0 or beta == 0.0:
                    continue
                gamma = complex(np.vdot(a[:, p], a[:, q]))
                g = abs(gamma)
                scale = math.sqrt(alpha * beta)
                if g <= tol * scale:
                    continue
                residual = max(residual, g / scale)
                phase = gamma / g  # e^{i phi}
                tau = (alpha - beta) / (2.0 * g)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap + s * np.conj(phase) * aq
                a[:, q] = -s * phase * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp + s * np.conj(phase) * vq
                v[:, q] = -s * phase * vp + c * vq
        if residual == 0.0:
            sweeps_used = sweep + 1
            break
    else:
        raise ConvergenceError(
            f"Jacobi SVD did not converge in {max_sweeps} sweeps "
            f"(relative off-diagonal residual {residual:.3e})",
            residual,
        )

    sigma = np.linalg.norm(a, axis=0)
    idx = np.argsort(-sigma, kind="stable")
    sigma = sigma[idx]
    a = a[:, idx]
    v = v[:, idx]

    u = np.zeros((m, n), dtype=complex)
    sigma_max = sigma[0] if sigma.size else 0.0
    nonzero_cols: list = []
    for k in range(n):
        if sigma_max > 0.0 and sigma[k] > 1e-15 * sigma_max:
            u[:, k] = a[:, k] / sigma[k]
            nonzero_cols.append(u[:, k])
        else:
            sigma[k] = 0.0
            u[:, k] = _complete_column(nonzero_cols, m)
            nonzero_cols.append(u[:, k])
    return SVDResult(u=u, sigma=sigma, vh=v.conj().T, sweeps=sweeps_used)
