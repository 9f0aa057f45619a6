"""Coincidence-experiment statistics: expectation values, the CHSH quantity,
marginal-law (no-signaling) checks, and a one-sample t test.

Probability tables follow the outcome order (11, 12, 21, 22): first factor's
outcome varies slowest, so p12 is "first side outcome 1, second side
outcome 2".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EXPERIMENT_KEYS = ("AB", "AB'", "A'B", "A'B'")

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)


@dataclass
class CoincidenceTable:
    """Joint outcome probabilities of one coincidence experiment.

    Parameters
    ----------
    experiment : str
        Which pair of single measurements was run, e.g. "AB'".
    p11, p12, p21, p22 : float
        Outcome probabilities in (first, second)-outcome order.
    a_labels, b_labels : pairs of str
        Outcome names of the two sides, e.g. ("Horse", "Bear").
    counts : tuple of four int, optional
        Raw counts behind the probabilities.
    n : int, optional
        Number of trials; required when counts are given.
    sum_tol : float
        Allowed deviation of the probability sum from 1.  Use 0.005 for
        tables transcribed from rounded sources, the tight default
        otherwise.
    """

    experiment: str
    p11: float
    p12: float
    p21: float
    p22: float
    a_labels: tuple = ("1", "2")
    b_labels: tuple = ("1", "2")
    counts: tuple | None = None
    n: int | None = None
    sum_tol: float = 1e-6

    def __post_init__(self):
        probs = self.probabilities
        # tiny epsilon: computed probabilities land on 0 and 1 up to round-off
        if np.any(probs < -1e-12) or np.any(probs > 1.0 + 1e-12):
            raise ValueError(f"{self.experiment}: probabilities must lie in [0, 1], got {probs}")
        total = float(probs.sum())
        if abs(total - 1.0) > self.sum_tol:
            raise ValueError(
                f"{self.experiment}: probabilities sum to {total:.6f}, "
                f"outside 1 +/- {self.sum_tol}"
            )
        if len(self.a_labels) != 2 or len(self.b_labels) != 2:
            raise ValueError("a_labels and b_labels must each have two entries")
        if self.counts is not None:
            if self.n is None or self.n <= 0:
                raise ValueError("counts require a positive n")
            if len(self.counts) != 4 or any(c < 0 for c in self.counts):
                raise ValueError("counts must be four nonnegative integers")
            if sum(self.counts) != self.n:
                raise ValueError(
                    f"{self.experiment}: counts sum to {sum(self.counts)}, expected n={self.n}"
                )
            for c, p in zip(self.counts, probs):
                if abs(c / self.n - p) > 1e-9:
                    raise ValueError(
                        f"{self.experiment}: counts/n disagree with probabilities "
                        f"({c}/{self.n} vs {p})"
                    )

    @classmethod
    def from_counts(cls, experiment, counts, n, a_labels=("1", "2"), b_labels=("1", "2")) -> "CoincidenceTable":
        probs = counts_to_probabilities(counts, n)
        return cls(
            experiment,
            *probs,
            a_labels=a_labels,
            b_labels=b_labels,
            counts=tuple(int(c) for c in counts),
            n=int(n),
            sum_tol=1e-9,
        )

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p11, self.p12, self.p21, self.p22], dtype=float)

    @property
    def labels(self) -> tuple:
        """Combined outcome names in table order (11, 12, 21, 22)."""
        return tuple(f"{a} {b}" for a in self.a_labels for b in self.b_labels)


@dataclass
class SinglesTable:
    """Single-measurement outcome probabilities, one (p1, p2) pair per side."""

    probabilities: dict
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for side, pair in self.probabilities.items():
            if len(pair) != 2:
                raise ValueError(f"singles for {side} must be a pair")
            if abs(pair[0] + pair[1] - 1.0) > 1e-4:
                raise ValueError(
                    f"singles for {side} sum to {pair[0] + pair[1]:.6f}, outside 1 +/- 1e-4"
                )


@dataclass
class ExperimentDataset:
    """Four coincidence tables (and optional singles) from one experiment."""

    name: str
    tables: dict
    singles: SinglesTable | None = None
    n_subjects: int | None = None

    def __post_init__(self):
        missing = [k for k in EXPERIMENT_KEYS if k not in self.tables]
        if missing:
            raise ValueError(f"dataset is missing coincidence tables: {missing}")
        extra = [k for k in self.tables if k not in EXPERIMENT_KEYS]
        if extra:
            raise ValueError(f"dataset has unknown coincidence tables: {extra}")


@dataclass
class MarginalDeviation:
    """One marginal-law comparison row.

    ``lhs`` and ``rhs`` are the same one-side marginal computed from the two
    coincidence experiments that share that side; under the marginal law
    (no-signaling) they must be equal.
    """

    side: str
    outcome: int
    experiment_lhs: str
    experiment_rhs: str
    lhs: float
    rhs: float
    deviation: float


@dataclass
class ChshReport:
    """CHSH evaluation of a four-experiment dataset."""

    e_values: dict
    chsh: float
    violates: bool
    tsirelson_gap: float
    marginal_deviations: list

    def __post_init__(self):
        combo = (
            self.e_values["A'B'"]
            + self.e_values["A'B"]
            + self.e_values["AB'"]
            - self.e_values["AB"]
        )
        if abs(self.chsh - combo) > 1e-12:
            raise ValueError("chsh does not match its defining combination of E values")
        if self.violates != (abs(self.chsh) > 2.0):
            raise ValueError("violates flag inconsistent with |chsh| > 2")


def expectation(table: CoincidenceTable) -> float:
    """E = p11 + p22 - p12 - p21 under the (+1, -1) outcome values."""
    probs = table.probabilities
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return float(table.p11 + table.p22 - table.p12 - table.p21)


def _tables_of(dataset) -> dict:
    tables = dataset.tables if isinstance(dataset, ExperimentDataset) else dataset
    for key in EXPERIMENT_KEYS:
        if key not in tables:
            raise ValueError(f"missing coincidence table {key!r}")
    return tables


def chsh(dataset) -> ChshReport:
    """Full CHSH report: E values, the bound check, and marginal-law rows.

    The CHSH combination is E(A',B') + E(A',B) + E(A,B') - E(A,B); the AB
    term carries the minus sign.
    """
    tables = _tables_of(dataset)
    e_values = {key: expectation(tables[key]) for key in EXPERIMENT_KEYS}
    value = e_values["A'B'"] + e_values["A'B"] + e_values["AB'"] - e_values["AB"]
    return ChshReport(
        e_values=e_values,
        chsh=value,
        violates=abs(value) > 2.0,
        tsirelson_gap=TSIRELSON_BOUND - abs(value),
        marginal_deviations=marginal_deviations(tables),
    )


def marginal_deviations(dataset) -> list:
    """The eight marginal-law rows of a four-experiment dataset.

    Each single measurement appears in two coincidence experiments; its
    outcome marginals must agree between them.  First-side marginals are row
    sums of the joint table, second-side marginals are column sums.
    """
    tables = _tables_of(dataset)

    def first_side(t: CoincidenceTable):
        return t.p11 + t.p12, t.p21 + t.p22

    def second_side(t: CoincidenceTable):
        return t.p11 + t.p21, t.p12 + t.p22

    plan = [
        ("A", "AB", "AB'", first_side),
        ("A'", "A'B", "A'B'", first_side),
        ("B", "AB", "A'B", second_side),
        ("B'", "AB'", "A'B'", second_side),
    ]
    rows = []
    for side, exp_lhs, exp_rhs, extract in plan:
        lhs_pair = extract(tables[exp_lhs])
        rhs_pair = extract(tables[exp_rhs])
        for outcome in (1, 2):
            lhs = lhs_pair[outcome - 1]
            rhs = rhs_pair[outcome - 1]
            rows.append(
                MarginalDeviation(
                    side=side,
                    outcome=outcome,
                    experiment_lhs=exp_lhs,
                    experiment_rhs=exp_rhs,
                    lhs=lhs,
                    rhs=rhs,
                    deviation=abs(lhs - rhs),
                )
            )
    return rows


def counts_to_probabilities(counts, n) -> tuple:
    """Relative frequencies counts[k]/n with consistency checks."""
    if n is None or n <= 0:
        raise ValueError("n must be a positive integer")
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")
    if sum(counts) != n:
        raise ValueError(f"counts sum to {sum(counts)}, expected n={n}")
    return tuple(c / n for c in counts)


@dataclass
class TTestResult:
    """One-sample t test of a mean against a fixed threshold."""

    statistic: float
    df: int
    p_value: float
    sample_mean: float
    sample_std: float
    threshold: float
    two_sided: bool


def student_t_tail(t: float, df: int, points: int = 4001) -> float:
    """P(T > t) for Student's t with ``df`` degrees of freedom.

    The substitution t = sqrt(df) tan(theta) turns the tail integral into
    C * sqrt(df) * integral of cos^(df-1)(theta) over
    [atan(t/sqrt(df)), pi/2], evaluated by composite Simpson quadrature.
    """
    if df < 1:
        raise ValueError("df must be at least 1")
    nu = float(df)
    norm_const = math.exp(math.lgamma((nu + 1.0) / 2.0) - math.lgamma(nu / 2.0))
    norm_const /= math.sqrt(nu * math.pi)
    lo = math.atan(t / math.sqrt(nu))
    hi = math.pi / 2.0
    theta = np.linspace(lo, hi, points)
    integrand = np.cos(theta) ** (nu - 1.0)
    weights = np.ones(points)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    integral = float(np.dot(weights, integrand)) * (theta[1] - theta[0]) / 3.0
    return norm_const * math.sqrt(nu) * integral


def t_test_vs_threshold(samples, threshold: float, two_sided: bool = False) -> TTestResult:
    """One-sample t test of mean(samples) against ``threshold``.

    The default reports the one-sided tail P(T > t); pass two_sided=True for
    the symmetric alternative.

    Raises
    ------
    ValueError
        For fewer than two samples or zero sample variance (the statistic
        is undefined).
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("t test needs at least two samples")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    if std == 0.0:
        raise ValueError("zero sample variance: t statistic undefined")
    df = int(x.size - 1)
    statistic = (mean - threshold) / (std / math.sqrt(x.size))
    if two_sided:
        p = 2.0 * student_t_tail(abs(statistic), df)
    else:
        p = student_t_tail(statistic, df)
    return TTestResult(
        statistic=statistic,
        df=df,
        p_value=p,
        sample_mean=mean,
        sample_std=std,
        threshold=threshold,
        two_sided=two_sided,
    )
