"""Grey relational analysis, entropy weights and TOPSIS.

Scores are oriented so that a larger value means a more vulnerable region;
rank 1 is the most vulnerable.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NormalizationError


@dataclass(frozen=True)
class DecisionMatrix:
    """Alternatives by criteria, with a benefit/cost flag per criterion.

    A benefit criterion raises vulnerability as it grows; a cost criterion
    lowers it.
    """

    alternatives: tuple[str, ...]
    criteria: tuple[str, ...]
    values: np.ndarray
    benefit: tuple[bool, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "benefit", tuple(bool(b) for b in self.benefit))
        if v.shape != (len(self.alternatives), len(self.criteria)):
            raise DomainError(
                f"values have shape {v.shape}; expected "
                f"({len(self.alternatives)}, {len(self.criteria)})"
            )
        if len(self.benefit) != len(self.criteria):
            raise DomainError("one orientation flag is needed per criterion")
        if not np.all(np.isfinite(v)):
            raise DomainError("decision matrix has missing or non-finite cells")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_table(cls, table) -> "DecisionMatrix":
        """Build from a :class:`floodrisk.data.IndicatorTable`."""
        return cls(table.provinces, table.criteria, table.values, table.benefit)

    def select(self, criteria: Sequence[str]) -> "DecisionMatrix":
        idx = [self.criteria.index(c) for c in criteria]
        return DecisionMatrix(
            self.alternatives,
            tuple(self.criteria[j] for j in idx),
            self.values[:, idx],
            tuple(self.benefit[j] for j in idx),
        )


@dataclass(frozen=True)
class RankResult:
    alternatives: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray
    method: str

    def ordered(self) -> list[tuple[str, float, int]]:
        """``(alternative, score, rank)`` sorted by rank."""
        order = np.argsort(self.ranks)
        return [(self.alternatives[i], float(self.scores[i]), int(self.ranks[i])) for i in order]

    def score_of(self, name: str) -> float:
        return float(self.scores[self.alternatives.index(name)])

    def rank_of(self, name: str) -> int:
        return int(self.ranks[self.alternatives.index(name)])


@dataclass(frozen=True)
class TierPartition:
    breaks: tuple[int, ...]
    tiers: dict

    def members(self, label: str) -> list[str]:
        return [a for a, t in self.tiers.items() if t == label]


def _values(m):
    return m.values if isinstance(m, DecisionMatrix) else np.asarray(m, dtype=float)


def check_weights(w, p: int) -> np.ndarray:
    """Validate a weight vector of length ``p`` and rescale it to sum to 1."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size != p:
        raise DomainError(f"expected {p} weights, got {w.size}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite and nonnegative")
    total = w.sum()
    if not total > 0:
        raise DomainError("weights sum to zero")
    return w / total


def equal_weights(p: int) -> np.ndarray:
    return np.full(p, 1.0 / p)


def normalize_minmax(m: DecisionMatrix) -> DecisionMatrix:
    """Rescale each column to [0, 1] with 1 the most vulnerable value."""
    v = m.values
    lo, hi = v.min(axis=0), v.max(axis=0)
    span = hi - lo
    for j, s in enumerate(span):
        if not s > 0:
            raise NormalizationError(
                f"criterion {m.criteria[j]!r} is constant and cannot be normalized",
                criterion=m.criteria[j],
            )
    ben = np.array(m.benefit)
    out = np.where(ben, (v - lo) / span, (hi - v) / span)
    return DecisionMatrix(m.alternatives, m.criteria, out, (True,) * len(m.criteria))


def gra_coefficients(m_norm, zeta: float = 0.5) -> np.ndarray:
    """Grey relational coefficients against the all-ones reference.

    ``(dmin + zeta*dmax) / (d + zeta*dmax)`` with ``d = |1 - x|`` and the
    extrema taken over the whole matrix. After min-max normalization the
    best value of every column equals 1, so ``dmin`` is 0.
    """
    if not 0 < zeta <= 1:
        raise DomainError(f"distinguishing coefficient must lie in (0, 1], got {zeta}")
    x = _values(m_norm)
    d = np.abs(1.0 - x)
    dmax, dmin = d.max(), d.min()
    if dmax == 0:
        return np.ones_like(d)
    return (dmin + zeta * dmax) / (d + zeta * dmax)


def _rank(scores: np.ndarray, names: Sequence[str]) -> np.ndarray:
    # descending score, ties broken by name
    order = sorted(range(len(names)), key=lambda i: (-scores[i], names[i]))
    ranks = np.empty(len(names), dtype=int)
    ranks[order] = np.arange(1, len(names) + 1)
    return ranks


def gra_grade(coeffs, w, alternatives: Sequence[str] | None = None) -> RankResult:
    """Weighted grey relational grade and the induced ranking."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 2:
        raise DomainError("coefficients must be a 2-D array")
    wv = check_weights(w, c.shape[1])
    names = tuple(alternatives) if alternatives is not None else tuple(str(i) for i in range(c.shape[0]))
    if len(names) != c.shape[0]:
        raise DomainError("one name is needed per alternative")
    g = c @ wv
    return RankResult(names, g, _rank(g, names), "GRA")


def entropy_weights(m, a: float = 0.01) -> np.ndarray:
    """Shannon-entropy criterion weights of a min-max normalized matrix.

    Each column is shifted by ``a`` to avoid log(0), turned into shares,
    and its entropy ``e_j`` scaled by ``1/ln n``. Weights are proportional
    to ``1 - e_j``, so a constant column gets weight 0.
    """
    if not a > 0:
        raise DomainError("amplitude a must be positive")
    x = _values(m) + a
    n = x.shape[0]
    if n < 2:
        raise DomainError("entropy is undefined for a single alternative")
    if np.any(x <= 0):
        raise DomainError("shifted values must be positive; normalize the matrix first")
    r = x / x.sum(axis=0)
    e = -(r * np.log(r)).sum(axis=0) / np.log(n)
    d = np.clip(1.0 - e, 0.0, None)
    if not d.sum() > 0:
        raise DomainError("every criterion is constant; entropy weights undefined")
    return d / d.sum()


def ratio_normalize(m: DecisionMatrix) -> np.ndarray:
    """``x/max`` for benefit columns and ``min/x`` for cost columns."""
    v = m.values
    out = np.empty_like(v)
    for j, ben in enumerate(m.benefit):
        col = v[:, j]
        if ben:
            mx = col.max()
            if not mx > 0:
                raise NormalizationError(
                    f"benefit criterion {m.criteria[j]!r} has no positive value",
                    criterion=m.criteria[j],
                )
            out[:, j] = col / mx
        else:
            if np.any(col <= 0):
                raise NormalizationError(
                    f"cost criterion {m.criteria[j]!r} has a nonpositive value",
                    criterion=m.criteria[j],
                )
            out[:, j] = col.min() / col
    return out


def topsis_rank(m: DecisionMatrix, w) -> RankResult:
    """Closeness coefficient ``S- / (S+ + S-)`` to the ideal solutions."""
    wv = check_weights(w, len(m.criteria))
    v = ratio_normalize(m) * wv
    pis, nis = v.max(axis=0), v.min(axis=0)
    s_plus = np.sqrt(((v - pis) ** 2).sum(axis=1))
    s_minus = np.sqrt(((v - nis) ** 2).sum(axis=1))
    denom = s_plus + s_minus
    if np.any(denom == 0):
        raise DomainError("all alternatives coincide after weighting; closeness undefined")
    c = s_minus / denom
    return RankResult(m.alternatives, c, _rank(c, m.alternatives), "TOPSIS")


def assign_tiers(r: RankResult, breaks: Sequence[int]) -> TierPartition:
    """Cut the ranking after each break rank; tiers are labelled A, B, C, ..."""
    b = tuple(int(k) for k in breaks)
    n = len(r.alternatives)
    if not b:
        raise DomainError("at least one break is required")
    if any(x >= y for x, y in zip(b, b[1:])) or b[0] < 1 or b[-1] > n - 1:
        raise DomainError(f"breaks must be strictly increasing within 1..{n - 1}, got {b}")
    if len(b) >= len(string.ascii_uppercase):
        raise DomainError("too many tiers")
    labels = {}
    for name, rank in zip(r.alternatives, r.ranks):
        labels[name] = string.ascii_uppercase[int(np.searchsorted(b, rank, side="left"))]
    return TierPartition(b, labels)


def compare_rankings(m: DecisionMatrix, zeta: float = 0.5, a: float = 0.01,
                     exposure: Sequence[str] | None = None) -> dict[str, RankResult]:
    """The four rankings used in the vulnerability comparison.

    ``gra_equal`` uses all criteria with equal weights, ``gra_exposure``
    only the exposure criteria (benefit columns unless ``exposure`` is
    given) with equal weights, and ``gra_entropy`` / ``topsis_entropy`` use
    entropy weights on all criteria.
    """
    norm = normalize_minmax(m)
    coeff = gra_coefficients(norm, zeta)
    p = len(m.criteria)
    we = entropy_weights(norm, a)
    if exposure is None:
        exposure = [c for c, ben in zip(m.criteria, m.benefit) if ben]
    sub = m.select(exposure)
    coeff_sub = gra_coefficients(normalize_minmax(sub), zeta)
    return {
        "gra_equal": gra_grade(coeff, equal_weights(p), m.alternatives),
        "gra_exposure": gra_grade(coeff_sub, equal_weights(len(exposure)), m.alternatives),
        "gra_entropy": gra_grade(coeff, we, m.alternatives),
        "topsis_entropy": topsis_rank(m, we),
    }
