"""Welch's t-test and the Wilcoxon signed-rank test.

Both are two-sided. The Wilcoxon test enumerates all sign assignments
exactly for small samples and falls back to a tie- and continuity-
corrected normal approximation for larger ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betainc

WILCOXON_EXACT_LIMIT = 25


@dataclass(frozen=True)
class TestResult:
    statistic: float | None
    p_value: float | None
    n_effective: int
    method: str

    @property
    def applicable(self):
        return self.p_value is not None


def _t_sf_two_sided(t, df):
    """Two-sided tail probability of Student's t via the regularized
    incomplete beta function."""
    if df <= 0:
        return 1.0
    x = df / (df + t * t)
    return float(betainc(df / 2.0, 0.5, x))


def welch_t(sample_a, sample_b) -> TestResult:
    """Welch's unequal-variance t-test.

    Returns a not-applicable result when either sample has fewer than
    two observations or both variances are zero.
    """
    a = [float(x) for x in sample_a]
    b = [float(x) for x in sample_b]
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        return TestResult(None, None, 0, "welch")
    mean1 = sum(a) / n1
    mean2 = sum(b) / n2
    var1 = sum((x - mean1) ** 2 for x in a) / (n1 - 1)
    var2 = sum((x - mean2) ** 2 for x in b) / (n2 - 1)
    if var1 == 0.0 and var2 == 0.0:
        if mean1 == mean2:
            return TestResult(0.0, 1.0, n1 + n2, "welch")
        return TestResult(None, None, n1 + n2, "welch")
    se2 = var1 / n1 + var2 / n2
    t = (mean1 - mean2) / math.sqrt(se2)
    df = se2 * se2 / (
        (var1 / n1) ** 2 / (n1 - 1) + (var2 / n2) ** 2 / (n2 - 1)
    )
    return TestResult(t, _t_sf_two_sided(t, df), n1 + n2, "welch")


def _signed_ranks(deltas):
    """Averaged ranks of |delta| with signs; zero deltas discarded."""
    nonzero = [d for d in deltas if d != 0.0]
    order = sorted(range(len(nonzero)), key=lambda i: abs(nonzero[i]))
    ranks = [0.0] * len(nonzero)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(nonzero[order[j + 1]]) == abs(nonzero[order[i]]):
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return nonzero, ranks


def wilcoxon_signed_rank(deltas) -> TestResult:
    """Two-sided Wilcoxon signed-rank test against a zero median."""
    deltas = [float(d) for d in deltas]
    nonzero, ranks = _signed_ranks(deltas)
    n = len(nonzero)
    if n == 0:
        return TestResult(0.0, 1.0, 0, "wilcoxon-exact")
    w_plus = sum(r for d, r in zip(nonzero, ranks) if d > 0)
    if n <= WILCOXON_EXACT_LIMIT:
        p = _wilcoxon_exact_p(ranks, w_plus)
        return TestResult(w_plus, p, n, "wilcoxon-exact")
    p = _wilcoxon_normal_p(nonzero, ranks, w_plus)
    return TestResult(w_plus, p, n, "wilcoxon-normal")


def _wilcoxon_exact_p(ranks, w_plus):
    """Exact two-sided p over all 2^n sign assignments.

    The distribution of W+ is built by dynamic programming over the
    (scaled-to-integer) ranks, equivalent to full enumeration.
    """
    # ranks are multiples of 0.5; scale to integers
    scaled = [int(round(2 * r)) for r in ranks]
    total = sum(scaled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in scaled:
        for w in range(total - r, -1, -1):
            if counts[w]:
                counts[w + r] += counts[w]
    n = len(ranks)
    denom = 2 ** n
    w_scaled = int(round(2 * w_plus))
    p_low = sum(counts[: w_scaled + 1]) / denom
    p_high = sum(counts[w_scaled:]) / denom
    return min(1.0, 2.0 * min(p_low, p_high))


def _wilcoxon_normal_p(nonzero, ranks, w_plus):
    """Normal approximation with tie and continuity corrections."""
    n = len(nonzero)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction over groups of equal |delta|
    groups = {}
    for d in nonzero:
        groups[abs(d)] = groups.get(abs(d), 0) + 1
    var -= sum(t ** 3 - t for t in groups.values()) / 48.0
    if var <= 0:
        return 1.0
    diff = w_plus - mean
    if diff > 0:
        diff -= 0.5
    elif diff < 0:
        diff += 0.5
    z = diff / math.sqrt(var)
    return math.erfc(abs(z) / math.sqrt(2.0))
