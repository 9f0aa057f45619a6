"""Entanglement structure relative to an isomorphism C^4 ~ C^2 (x) C^2.

Whether a state, measurement, or evolution is "product" is never absolute:
it is a property relative to a chosen labeled unitary identification of the
4-dimensional space with the tensor product of two 2-dimensional factor
spaces.  This module provides that identification (`Isomorphism`), Schmidt
decompositions of states and operators transported through it, evolution
operators between measurement models, and the factorization / marginal-law
diagnostics built on top.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import CVec, gram, orthonormalize, svd, tensor_op

# Outcome labels of the product basis, in component order.
PRODUCT_LABELS = ((1, 1), (1, 2), (2, 1), (2, 2))


def _state_values(state) -> np.ndarray:
    if isinstance(state, CVec):
        return state.values
    values = getattr(state, "values", state)
    if isinstance(values, CVec):
        values = values.values
    return np.asarray(values, dtype=complex).reshape(-1)


def _model_eigenvectors(measurement) -> list:
    """Repaired eigenvectors of a measurement model or plain vector family."""
    vecs = getattr(measurement, "eigenvectors", measurement)
    return [_state_values(v) for v in vecs]


@dataclass
class Isomorphism:
    """A labeled unitary identification of C^4 with C^2 (x) C^2.

    ``matrix`` sends a vector in C^4 to its coefficient vector over the
    product basis; component k of the image carries the outcome label
    PRODUCT_LABELS[k].
    """

    matrix: np.ndarray
    name: str = "canonical"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError("isomorphism matrix must be 4x4")
        dev = np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(4)))
        if dev > 1e-9:
            raise ValueError(f"isomorphism matrix is not unitary (deviation {dev:.3e})")

    def apply(self, state) -> np.ndarray:
        return self.matrix @ _state_values(state)

    def transport(self, operator) -> np.ndarray:
        """Image U M U^† of an operator under the identification."""
        op = np.asarray(getattr(operator, "values", operator), dtype=complex)
        return self.matrix @ op @ self.matrix.conj().T


def canonical_iso() -> Isomorphism:
    """The identity identification: basis vector k is the product vector k."""
    return Isomorphism(np.eye(4, dtype=complex), name="canonical")


def random_isomorphism(rng: np.random.Generator) -> Isomorphism:
    """A Haar-distributed isomorphism (Gram-Schmidt of a Ginibre sample)."""
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    cols = orthonormalize([z[:, k] for k in range(4)], order=(0, 1, 2, 3))
    return Isomorphism(np.column_stack(cols), name="random")


def canonical_iso_of(measurement) -> Isomorphism:
    """The isomorphism that makes a measurement's eigenvectors the product basis.

    Maps the k-th (repaired) eigenvector to the k-th product basis vector, so
    the transported operator is diagonal with the outcome eigenvalues.

    Raises
    ------
    ValueError
        If the eigenvector family deviates from orthonormality by more than
        0.05 before repair, or is linearly dependent.
    """
    vecs = _model_eigenvectors(measurement)
    if len(vecs) != 4:
        raise ValueError("need four eigenvectors")
    dev = float(np.max(np.abs(gram(vecs) - np.eye(4))))
    if dev > 0.05:
        raise ValueError(
            f"eigenvectors deviate from orthonormality by {dev:.4f}, beyond repair tolerance 0.05"
        )
    repaired = orthonormalize(vecs)
    matrix = np.array([v.conj() for v in repaired])
    name = getattr(measurement, "experiment", None)
    return Isomorphism(matrix, name=f"from-model:{name}" if name else "from-model")


@dataclass
class SchmidtDecomposition:
    """State decomposition psi = sum_k c_k u_k (x) v_k through an isomorphism."""

    coefficients: np.ndarray
    left: np.ndarray   # 2x2, column k is u_k
    right: np.ndarray  # 2x2, column k is v_k
    iso_name: str = field(default="canonical", compare=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        total = float(np.sum(self.coefficients**2))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"Schmidt coefficients must satisfy sum c^2 = 1, got {total}")

    def rank(self, rank_tol: float = 1e-7) -> int:
        return int(np.sum(self.coefficients > rank_tol * self.coefficients[0]))

    @property
    def is_product(self) -> bool:
        return self.rank() == 1


@dataclass
class OperatorSchmidt:
    """Operator decomposition T = sum_k sigma_k A_k (x) B_k.

    ``transported`` is the operator's image under the isomorphism; the
    factors are Hilbert-Schmidt orthonormal 2x2 matrices.
    """

    sigma: np.ndarray
    factors_a: list
    factors_b: list
    transported: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        hs_sq = float(np.sum(np.abs(self.transported) ** 2))
        if abs(float(np.sum(self.sigma**2)) - hs_sq) > 1e-9 * max(hs_sq, 1.0):
            raise ValueError("sum sigma^2 must equal the squared Hilbert-Schmidt norm")

    def rank(self, rank_tol: float = 1e-7) -> int:
        if self.sigma[0] == 0.0:
            return 0
        return int(np.sum(self.sigma > rank_tol * self.sigma[0]))

    @property
    def is_product(self) -> bool:
        return self.rank() == 1

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for s, a, b in zip(self.sigma, self.factors_a, self.factors_b):
            out += s * tensor_op(a, b)
        return out


@dataclass
class Evolution:
    """Unitary operator carrying one measurement's eigenstates to another's."""

    matrix: np.ndarray
    source: str
    target: str

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dev = np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(4)))
        if dev > 1e-9:
            raise ValueError(f"evolution operator is not unitary (deviation {dev:.3e})")


def apply_iso(iso: Isomorphism, state) -> np.ndarray:
    """Coefficients of a state over the product basis of ``iso``."""
    return iso.apply(state)


def reshuffle(matrix) -> np.ndarray:
    """Rearrange a 4x4 operator so tensor factors become outer factors.

    With indices split as row = (i, j), column = (i', j') — i, i' on the
    first factor, j, j' on the second, all in {0, 1} and row-major — the
    reshuffled matrix is

        R[(i, i'), (j, j')] = T[(i, j), (i', j')].

    A product operator A (x) B has T[(i, j), (i', j')] = A[i, i'] B[j, j'],
    so its reshuffle is the rank-1 outer product vec(A) vec(B)^T of the
    row-major vectorizations.  Worked 2x2 example: A = [[0, 1], [1, 0]]
    (swap), B = [[1, 0], [0, -1]] (sign flip) give

        T = A (x) B = [[0, 0, 1,  0],          R = vec(A) vec(B)^T
                       [0, 0, 0, -1],            = (0, 1, 1, 0)^T (1, 0, 0, -1)
                       [1, 0, 0,  0],            = [[0, 0, 0,  0],
                       [0,-1, 0,  0]]               [1, 0, 0, -1],
                                                    [1, 0, 0, -1],
                                                    [0, 0, 0,  0]],

    which has a single nonzero singular value 2 = ||A||_HS ||B||_HS.
    """
    t = np.asarray(matrix, dtype=complex)
    if t.shape != (4, 4):
        raise ValueError("reshuffle expects a 4x4 matrix")
    return t.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def _operator_schmidt_of_transported(transported: np.ndarray) -> OperatorSchmidt:
    res = svd(reshuffle(transported))
    factors_a = [res.u[:, k].reshape(2, 2) for k in range(4)]
    factors_b = [res.vh[k, :].reshape(2, 2) for k in range(4)]
    return OperatorSchmidt(
        sigma=res.sigma, factors_a=factors_a, factors_b=factors_b, transported=transported
    )


def schmidt_state(state, iso: Isomorphism | None = None) -> SchmidtDecomposition:
    """Schmidt decomposition of a unit state relative to an isomorphism."""
    iso = iso if iso is not None else canonical_iso()
    psi = _state_values(state)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("schmidt_state expects a unit state")
    coeffs = iso.apply(psi).reshape(2, 2)
    res = svd(coeffs)
    return SchmidtDecomposition(
        coefficients=res.sigma,
        left=res.u,
        right=res.vh.T,  # column k holds the second-factor components
        iso_name=iso.name,
    )


def operator_schmidt(operator, iso: Isomorphism | None = None) -> OperatorSchmidt:
    """Operator-Schmidt decomposition of a self-adjoint operator.

    The operator is transported through the isomorphism, reshuffled, and
    decomposed by SVD; the singular values are the Schmidt coefficients.

    Raises
    ------
    ValueError
        If the operator is not Hermitian within 1e-9.
    """
    iso = iso if iso is not None else canonical_iso()
    op = np.asarray(getattr(operator, "values", operator), dtype=complex)
    if op.shape != (4, 4):
        raise ValueError("operator must be 4x4")
    if np.max(np.abs(op - op.conj().T)) > 1e-9:
        raise ValueError("operator_schmidt expects a Hermitian operator")
    return _operator_schmidt_of_transported(iso.transport(op))


def measurement_entanglement_degree(operator, iso: Isomorphism | None = None) -> float:
    """How far a measurement is from product form: 1 - sigma_1^2 / sum sigma^2.

    Zero exactly for product measurements; approaches 1 - 1/k when k Schmidt
    coefficients are equal.
    """
    decomposition = operator_schmidt(operator, iso)
    total = float(np.sum(decomposition.sigma**2))
    if total == 0.0:
        raise ValueError("entanglement degree undefined for the zero operator")
    return 1.0 - float(decomposition.sigma[0] ** 2) / total


def evolution_between(source_model, target_model) -> Evolution:
    """The unitary sending the k-th eigenvector of source to the k-th of target.

    Eigenvectors pair by outcome position (11 to 11, 12 to 12, and so on).
    """
    src = _model_eigenvectors(source_model)
    dst = _model_eigenvectors(target_model)
    matrix = np.zeros((4, 4), dtype=complex)
    for s, d in zip(src, dst):
        matrix += np.outer(d, s.conj())
    return Evolution(
        matrix=matrix,
        source=str(getattr(source_model, "experiment", "source")),
        target=str(getattr(target_model, "experiment", "target")),
    )


def is_product_evolution(evolution: Evolution, iso: Isomorphism | None = None,
                         rank_tol: float = 1e-7) -> bool:
    """Whether a unitary evolution is a tensor product relative to ``iso``."""
    iso = iso if iso is not None else canonical_iso()
    transported = iso.transport(evolution.matrix)
    return _operator_schmidt_of_transported(transported).rank(rank_tol) == 1


def states_equal_up_to_phase(u, v, tol: float = 0.01) -> bool:
    """Whether two unit states coincide up to a global phase.

    True when |<u|v>| >= 1 - tol; the default threshold 0.99 separates
    genuinely distinct contextual representations from rounding noise.
    """
    a = _state_values(u)
    b = _state_values(v)
    overlap = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return bool(overlap >= 1.0 - tol)


@dataclass
class FactorizationReport:
    """Joint outcome probabilities against the product of marginals.

    ``joint[i, j]`` is the probability of outcome (i+1, j+1); ``expected``
    holds the products marginal_a[i] * marginal_b[j].  ``marginal_source``
    records whether marginals came from supplied singles data or from the
    joint table's row/column sums.
    """

    joint: np.ndarray
    marginal_a: np.ndarray
    marginal_b: np.ndarray
    marginal_source: str
    expected: np.ndarray
    deviations: np.ndarray
    max_deviation: float


def check_factorization(state, measurement, singles=None) -> FactorizationReport:
    """Compare joint collapse probabilities with products of marginals.

    Parameters
    ----------
    state : array-like or StateVector
        Unit state in C^4.
    measurement : ObservableModel or sequence of four vectors
        Four-outcome coincidence measurement; outcome k carries the product
        label PRODUCT_LABELS[k].
    singles : pair of pairs, optional
        Externally measured one-side marginals ((pA1, pA2), (pB1, pB2)).
        When omitted, marginals are the joint table's row and column sums.
    """
    psi = _state_values(state)
    vecs = _model_eigenvectors(measurement)
    joint = np.array(
        [[abs(np.vdot(vecs[0], psi)) ** 2, abs(np.vdot(vecs[1], psi)) ** 2],
         [abs(np.vdot(vecs[2], psi)) ** 2, abs(np.vdot(vecs[3], psi)) ** 2]]
    )
    if singles is not None:
        marginal_a = np.asarray(singles[0], dtype=float)
        marginal_b = np.asarray(singles[1], dtype=float)
        source = "singles"
    else:
        marginal_a = joint.sum(axis=1)
        marginal_b = joint.sum(axis=0)
        source = "joint"
    expected = np.outer(marginal_a, marginal_b)
    deviations = np.abs(joint - expected)
    return FactorizationReport(
        joint=joint,
        marginal_a=marginal_a,
        marginal_b=marginal_b,
        marginal_source=source,
        expected=expected,
        deviations=deviations,
        max_deviation=float(deviations.max()),
    )


@dataclass
class ProductIsoSearchResult:
    """Outcome of a randomized search for a common product-rendering isomorphism."""

    found: bool
    witness: Isomorphism | None
    trials: int


def refute_common_product_iso(operators, extra_isos=(), n_trials: int = 10_000,
                              seed: int = 0, rank_tol: float = 1e-7) -> ProductIsoSearchResult:
    """Search for one isomorphism rendering every operator product.

    Tries ``n_trials`` seeded Haar-random isomorphisms plus any supplied
    ``extra_isos`` (typically each measurement's own canonical
    identification).  Returns as soon as some isomorphism makes all
    operators product; a not-found result is evidence — not proof — that no
    such isomorphism exists.
    """
    ops = [np.asarray(getattr(op, "values", op), dtype=complex) for op in operators]
    rng = np.random.default_rng(seed)
    candidates = list(extra_isos)
    trials = 0
    for k in range(n_trials + len(candidates)):
        iso = candidates[k] if k < len(candidates) else random_isomorphism(rng)
        trials += 1
        all_product = True
        for op in ops:
            transported = iso.transport(op)
            if _operator_schmidt_of_transported(transported).rank(rank_tol) != 1:
                all_product = False
                break
        if all_product:
            return ProductIsoSearchResult(found=True, witness=iso, trials=trials)
    return ProductIsoSearchResult(found=False, witness=None, trials=trials)
