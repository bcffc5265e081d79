"""Distributional separability metrics between two labeled feature matrices.

Three complementary views of how far apart two sample distributions sit
in a shared feature space:

* ``f1`` — maximum per-dimension Fisher ratio (squared mean gap over
  summed population variances). Higher means more separable.
* ``f2`` — product over dimensions of the overlap fraction of the two
  value ranges (the overlapping hyper-rectangle's volume). Lower means
  more separable.
* ``f3`` — largest per-dimension non-overlap fraction. Higher means
  more separable.

Dimensions where both distributions collapse (zero summed variance, or
zero combined range) are flagged as degenerate. A zero-variance
dimension with distinct means is a perfect separator; its Fisher ratio
is reported as the finite cap ``F1_CAP``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    MismatchedColumnsError,
    TooFewClassesError,
    TooFewRowsError,
)
from .features import FeatureMatrix

F1_CAP = 1e12

SHIFT_METRICS = ("f1", "f2", "f3")


@dataclass
class SeparabilityScore:
    f1: float
    f1_argmax: int
    f2: float
    f3: float
    f3_argmax: int  # -1 when every dimension is range-degenerate
    per_dim_fisher: np.ndarray
    per_dim_overlap: np.ndarray
    per_dim_range: np.ndarray
    degenerate_dims: tuple[int, ...]

    def by_metric(self, metric: str) -> float:
        if metric not in SHIFT_METRICS:
            raise ConfigError(f"unknown metric {metric!r}; use one of {SHIFT_METRICS}")
        return {"f1": self.f1, "f2": self.f2, "f3": self.f3}[metric]


def _check_pair(target: FeatureMatrix, reference: FeatureMatrix, min_rows: int) -> None:
    if target.column_index != reference.column_index:
        raise MismatchedColumnsError(
            f"matrices for {target.class_label!r} and {reference.class_label!r} "
            "have different column maps"
        )
    for m in (target, reference):
        if m.n_rows < min_rows:
            raise TooFewRowsError(
                f"class {m.class_label!r} has {m.n_rows} rows, needs >= {min_rows}"
            )


def _fisher_per_dim(t: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean_gap = (t.mean(axis=0) - r.mean(axis=0)) ** 2
    var_sum = t.var(axis=0) + r.var(axis=0)  # population variance
    degenerate = var_sum == 0.0
    per_dim = np.zeros(t.shape[1])
    ok = ~degenerate
    per_dim[ok] = mean_gap[ok] / var_sum[ok]
    per_dim[degenerate & (mean_gap > 0.0)] = F1_CAP
    return per_dim, degenerate


def _overlap_per_dim(t: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t_lo, t_hi = t.min(axis=0), t.max(axis=0)
    r_lo, r_hi = r.min(axis=0), r.max(axis=0)
    overlap = np.maximum(0.0, np.minimum(t_hi, r_hi) - np.maximum(t_lo, r_lo))
    span = np.maximum(t_hi, r_hi) - np.minimum(t_lo, r_lo)
    return overlap, span


def max_fisher_ratio(
    target: FeatureMatrix, reference: FeatureMatrix
) -> tuple[float, int, np.ndarray]:
    """(f1, argmax column, per-dimension ratios). Needs >= 2 rows per side."""
    _check_pair(target, reference, min_rows=2)
    per_dim, _ = _fisher_per_dim(target.values, reference.values)
    idx = int(np.argmax(per_dim))
    return float(per_dim[idx]), idx, per_dim


def overlap_volume(
    target: FeatureMatrix, reference: FeatureMatrix
) -> tuple[float, np.ndarray, np.ndarray]:
    """(f2, per-dimension overlap, per-dimension range). Needs >= 1 row."""
    _check_pair(target, reference, min_rows=1)
    overlap, span = _overlap_per_dim(target.values, reference.values)
    live = span > 0.0
    f2 = float(np.prod(overlap[live] / span[live])) if live.any() else 1.0
    return f2, overlap, span


def feature_efficiency(
    target: FeatureMatrix, reference: FeatureMatrix
) -> tuple[float, int]:
    """(f3, argmax column). Needs >= 1 row per side."""
    _check_pair(target, reference, min_rows=1)
    overlap, span = _overlap_per_dim(target.values, reference.values)
    live = span > 0.0
    if not live.any():
        return 0.0, -1
    efficiency = np.where(live, 1.0 - np.divide(overlap, span, where=live), -np.inf)
    idx = int(np.argmax(efficiency))
    return float(efficiency[idx]), idx


def separability_score(target: FeatureMatrix, reference: FeatureMatrix) -> SeparabilityScore:
    """All three metrics in one pass over the two matrices."""
    _check_pair(target, reference, min_rows=2)
    t, r = target.values, reference.values

    per_dim_fisher, var_degenerate = _fisher_per_dim(t, r)
    f1_idx = int(np.argmax(per_dim_fisher))

    overlap, span = _overlap_per_dim(t, r)
    live = span > 0.0
    f2 = float(np.prod(overlap[live] / span[live])) if live.any() else 1.0
    if live.any():
        efficiency = np.where(live, 1.0 - np.divide(overlap, span, where=live), -np.inf)
        f3_idx = int(np.argmax(efficiency))
        f3 = float(efficiency[f3_idx])
    else:
        f3, f3_idx = 0.0, -1

    degenerate = tuple(int(i) for i in np.flatnonzero(var_degenerate | ~live))
    return SeparabilityScore(
        f1=float(per_dim_fisher[f1_idx]),
        f1_argmax=f1_idx,
        f2=f2,
        f3=f3,
        f3_argmax=f3_idx,
        per_dim_fisher=per_dim_fisher,
        per_dim_overlap=overlap,
        per_dim_range=span,
        degenerate_dims=degenerate,
    )


@dataclass
class PairResult:
    target: str
    reference: str
    score: SeparabilityScore
    normalized_fdr: float = float("nan")

    @property
    def raw_fdr(self) -> float:
        return self.score.f1


@dataclass
class PairwiseAudit:
    mode: str  # "one-vs-one" or "one-vs-rest"
    results: list[PairResult] = field(default_factory=list)

    @property
    def class_pairs(self) -> list[tuple[str, str]]:
        return [(r.target, r.reference) for r in self.results]

    def result_for(self, target: str, reference: str) -> PairResult:
        for r in self.results:
            if (r.target, r.reference) == (target, reference):
                return r
        raise KeyError((target, reference))


def _pool_rest(matrices: list[FeatureMatrix]) -> FeatureMatrix:
    first = matrices[0]
    values = np.vstack([m.values for m in matrices])
    provenance = tuple(p for m in matrices for p in m.row_provenance)
    return FeatureMatrix(values, "rest", first.column_index, provenance)


def pairwise_audit(
    matrices: dict[str, FeatureMatrix], mode: str = "one-vs-one"
) -> PairwiseAudit:
    """Score every class pair (or each class against the pooled rest).

    Pairs are ordered lexicographically by class name. The normalized
    Fisher ratio divides each pair's f1 by the maximum f1 within this
    audit, so the top pair reads exactly 1.0 (all zeros stay zero).
    """
    if len(matrices) < 2:
        raise TooFewClassesError(f"need >= 2 classes, got {len(matrices)}")
    labels = sorted(matrices)

    results: list[PairResult] = []
    if mode == "one-vs-one":
        for a, b in itertools.combinations(labels, 2):
            results.append(PairResult(a, b, separability_score(matrices[a], matrices[b])))
    elif mode == "one-vs-rest":
        for a in labels:
            rest = _pool_rest([matrices[b] for b in labels if b != a])
            results.append(PairResult(a, "rest", separability_score(matrices[a], rest)))
    else:
        raise ConfigError(f"unknown audit mode {mode!r}")

    peak = max(r.raw_fdr for r in results)
    for r in results:
        r.normalized_fdr = r.raw_fdr / peak if peak > 0.0 else 0.0
    return PairwiseAudit(mode=mode, results=results)
