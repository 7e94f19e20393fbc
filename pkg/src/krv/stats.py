"""Learner comparison statistics: average ranks, Friedman/Fisher, Nemenyi CD, paired t-test.

Rank 1 goes to the most accurate learner on a dataset; ties share the average
of the ranks they span.  The Friedman null hypothesis (all learners are
equivalent) is rejected when the chi-square statistic strictly exceeds the
tabulated critical value with ``G - 1`` degrees of freedom.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

# chi-square upper critical values, df = 1..10
CHI2_CRITICAL = {
    0.05: (3.8415, 5.9915, 7.8147, 9.4877, 11.0705, 12.5916, 14.0671, 15.5073, 16.9190, 18.3070),
    0.01: (6.6349, 9.2103, 11.3449, 13.2767, 15.0863, 16.8119, 18.4753, 20.0902, 21.6660, 23.2093),
}

# two-tailed Nemenyi q at alpha = 0.05 for G = 2..10 learners
NEMENYI_Q05 = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}


def rank_row(accuracies) -> np.ndarray:
    """Ranks of one dataset's accuracies; 1 is best, ties get the average rank."""
    acc = np.asarray(accuracies, dtype=float)
    if not np.all(np.isfinite(acc)):
        raise ValueError("accuracies must be finite")
    return rankdata(-acc, method="average")


def rank_matrix(accuracies) -> np.ndarray:
    acc = np.atleast_2d(np.asarray(accuracies, dtype=float))
    return np.vstack([rank_row(row) for row in acc])


def friedman_chi2(ranks) -> float:
    """Friedman statistic ``12S/(G(G+1)) * (sum_j R_j^2 - G(G+1)^2/4)`` from an S x G rank matrix."""
    ranks = np.asarray(ranks, dtype=float)
    if ranks.ndim != 2:
        raise ValueError("ranks must be an S x G matrix")
    S, G = ranks.shape
    if S < 2 or G < 2:
        raise ValueError(f"need at least 2 datasets and 2 learners, got S={S}, G={G}")
    R = ranks.mean(axis=0)
    return float(12.0 * S / (G * (G + 1)) * (np.sum(R**2) - G * (G + 1) ** 2 / 4.0))


def fisher_f(chi2: float, S: int, G: int) -> float:
    """Iman-Davenport refinement ``(S-1) chi2 / (S(G-1) - chi2)``."""
    denom = S * (G - 1) - chi2
    if denom <= 0:
        raise ValueError(f"chi2={chi2} is at or beyond the pole S(G-1)={S * (G - 1)}")
    return float((S - 1) * chi2 / denom)


def nemenyi_cd(G: int, S: int, q_alpha: float | None = None) -> float:
    """Critical difference ``q_alpha sqrt(G(G+1)/(6S))``; q defaults to the alpha=0.05 table."""
    if G < 2 or S < 1:
        raise ValueError(f"need G >= 2 and S >= 1, got G={G}, S={S}")
    if q_alpha is None:
        if G not in NEMENYI_Q05:
            raise ValueError(f"no tabulated Nemenyi q for G={G}")
        q_alpha = NEMENYI_Q05[G]
    return float(q_alpha * math.sqrt(G * (G + 1) / (6.0 * S)))


def chi2_critical(G: int, alpha: float = 0.05) -> float:
    df = G - 1
    if alpha not in CHI2_CRITICAL or not 1 <= df <= len(CHI2_CRITICAL[alpha]):
        raise ValueError(f"no tabulated chi-square critical value for df={df}, alpha={alpha}")
    return CHI2_CRITICAL[alpha][df - 1]


def friedman_decision(chi2: float, G: int, S: int, alpha: float = 0.05) -> bool:
    """True iff ``chi2`` strictly exceeds the critical value (null hypothesis rejected)."""
    if S < 2:
        raise ValueError("need at least 2 datasets")
    return bool(chi2 > chi2_critical(G, alpha))


def group_by_cd(avg_ranks, cd: float) -> list[tuple[int, ...]]:
    """Maximal runs of learners (sorted by rank) whose extreme ranks differ by less than ``cd``.

    Returns learner indices per group, best-ranked group first.  Groups may
    overlap; a group contained in an earlier one is dropped.
    """
    r = np.asarray(avg_ranks, dtype=float)
    order = np.argsort(r, kind="stable")
    sorted_r = r[order]
    groups = []
    last_end = -1
    for i in range(r.size):
        j = i
        while j + 1 < r.size and sorted_r[j + 1] - sorted_r[i] < cd:
            j += 1
        if j > last_end:
            groups.append(tuple(int(x) for x in order[i : j + 1]))
            last_end = j
    return groups


def paired_t_statistic(a, b) -> tuple[float, float]:
    """(t, two-tailed p) for the paired differences ``a - b``.

    Zero-variance differences give ``t = +-inf, p = 0`` for a nonzero mean and
    ``t = 0, p = 1`` when every difference is zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    n = a.size
    if n < 2:
        raise ValueError("need at least 2 paired samples")
    d = a - b
    mean = math.fsum(d) / n
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), p


def paired_t_test(a, b, alpha: float = 0.05) -> int:
    """1 when the paired t-test rejects equal means at level ``alpha`` (two-tailed), else 0."""
    _, p = paired_t_statistic(a, b)
    return int(p < alpha)


@dataclass(frozen=True)
class RankReport:
    learners: tuple[str, ...]
    datasets: tuple[str, ...]
    accuracies: np.ndarray
    ranks: np.ndarray
    avg_ranks: np.ndarray
    chi2_F: float
    fisher_f: float
    cd: float
    critical: float
    groups: tuple[tuple[str, ...], ...]
    rejected: bool
    alpha: float = 0.05

    def to_csv(self) -> str:
        """Accuracies, ranks and statistics as one CSV block."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for title, matrix in (("accuracies", self.accuracies), ("ranks", self.ranks)):
            w.writerow(["section", title])
            w.writerow(["dataset", *self.learners])
            for name, row in zip(self.datasets, matrix):
                w.writerow([name, *(repr(float(v)) for v in row)])
        w.writerow(["section", "statistics"])
        w.writerow(["avg_rank", *(repr(float(v)) for v in self.avg_ranks)])
        w.writerow(["chi2_F", repr(self.chi2_F)])
        w.writerow(["fisher_f", repr(self.fisher_f)])
        w.writerow(["cd", repr(self.cd)])
        w.writerow(["critical", repr(self.critical)])
        w.writerow(["alpha", repr(self.alpha)])
        w.writerow(["rejected", "true" if self.rejected else "false"])
        for g in self.groups:
            w.writerow(["group", *g])
        return buf.getvalue()


def build_rank_report(
    learners: Sequence[str],
    datasets: Sequence[str],
    accuracies,
    alpha: float = 0.05,
    q_alpha: float | None = None,
) -> RankReport:
    """Rank statistics for an S x G accuracy matrix (rows datasets, columns learners)."""
    acc = np.asarray(accuracies, dtype=float)
    S, G = acc.shape
    if len(learners) != G or len(datasets) != S:
        raise ValueError("learner/dataset names do not match the accuracy matrix")
    ranks = rank_matrix(acc)
    avg = ranks.mean(axis=0)
    chi2 = friedman_chi2(ranks)
    # perfect agreement puts chi2 on the pole of the Fisher refinement
    ff = fisher_f(chi2, S, G) if S * (G - 1) > chi2 else math.inf
    if q_alpha is None and alpha != 0.05:
        raise ValueError("Nemenyi q is tabulated for alpha=0.05 only; pass q_alpha")
    cd = nemenyi_cd(G, S, q_alpha)
    critical = chi2_critical(G, alpha)
    groups = tuple(tuple(learners[i] for i in g) for g in group_by_cd(avg, cd))
    return RankReport(
        learners=tuple(learners),
        datasets=tuple(datasets),
        accuracies=acc,
        ranks=ranks,
        avg_ranks=avg,
        chi2_F=chi2,
        fisher_f=ff,
        cd=cd,
        critical=critical,
        groups=groups,
        rejected=bool(chi2 > critical),
        alpha=alpha,
    )
