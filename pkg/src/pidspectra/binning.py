"""Hierarchical quantile binning of continuous inputs into a joint array.

Bipolar (mixture-model) samples are split by sign first and each sign group
is then cut into equal-count bins, so the sign boundary at 0 is always an
edge.  Unipolar samples are cut directly into equal-count bins.  Outputs are
binned by sign.  Empirical quantiles use the nearest-rank order statistic;
values landing exactly on a boundary go to the upper bin (bins are
right-open intervals).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .dist import JointDist3, normalize
from .models import SampleBatch

DEFAULT_BINS = 6
ALLOWED_BINS = (4, 5, 6, 8)


class BinningError(ValueError):
    pass


class DegenerateSignError(BinningError):
    """A sign group is too small for the bipolar binning strategy."""


class TooFewValuesError(BinningError):
    pass


@dataclass(frozen=True)
class BinEdges:
    """Interior boundaries defining ``bins`` right-open intervals.

    A value v falls in bin k when boundaries[k-1] <= v < boundaries[k], with
    the outer intervals unbounded.  Boundaries are strictly increasing.
    """

    boundaries: np.ndarray
    strategy: str
    bins: int

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.shape != (self.bins - 1,):
            raise BinningError(
                f"{self.bins} bins need {self.bins - 1} boundaries, got {b.shape}")
        if not np.all(np.diff(b) > 0):
            raise BinningError(f"boundaries not strictly increasing: {b}")
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)

    def assign(self, values) -> np.ndarray:
        """Bin index per value; boundary ties go up, outliers clamp."""
        return np.searchsorted(self.boundaries, np.asarray(values), side="right")


def _chunk_boundaries(sorted_vals: np.ndarray, k: int) -> list[float]:
    """Boundaries splitting sorted values into k equal-count chunks.

    The boundary after chunk j is the first order statistic of chunk j+1,
    so right-open binning reproduces the rank split exactly (up to ties).
    """
    n = sorted_vals.shape[0]
    return [float(sorted_vals[ceil(j * n / k)]) for j in range(1, k)]


def bgm_edges(values, bins: int = DEFAULT_BINS) -> BinEdges:
    """Sign split, then equal-count bins inside each sign group.

    With an odd bin count the positive group receives the extra bin.
    """
    _check_bins(bins)
    values = np.asarray(values, dtype=float)
    neg = np.sort(values[values < 0])
    pos = np.sort(values[values >= 0])
    k_neg = bins // 2
    k_pos = bins - k_neg
    if neg.size < k_neg or pos.size < k_pos:
        raise DegenerateSignError(
            f"need at least {k_neg} negative and {k_pos} nonnegative values, "
            f"got {neg.size} and {pos.size}")
    boundaries = _chunk_boundaries(neg, k_neg) + [0.0] + _chunk_boundaries(pos, k_pos)
    return BinEdges(boundaries=np.array(boundaries), strategy="sign-tertile", bins=bins)


def sbg_edges(values, bins: int = DEFAULT_BINS) -> BinEdges:
    """Equal-count bins over all values."""
    _check_bins(bins)
    values = np.asarray(values, dtype=float)
    if values.size < bins:
        raise TooFewValuesError(f"need at least {bins} values, got {values.size}")
    boundaries = _chunk_boundaries(np.sort(values), bins)
    return BinEdges(boundaries=np.array(boundaries), strategy="sextile", bins=bins)


def _check_bins(bins: int) -> None:
    if bins < 2:
        raise BinningError(f"bins={bins} must be at least 2")


def build_joint(batch: SampleBatch, r_edges: BinEdges, c_edges: BinEdges) -> JointDist3:
    """Count (y, r-bin, c-bin) occurrences and normalize to probabilities.

    Output index 0 holds y = -1, index 1 holds y = +1.  The result does not
    depend on sample order, and zero cells are retained.
    """
    if batch.y is None:
        raise BinningError("batch has no outputs; simulate them first")
    iy = (np.asarray(batch.y) > 0).astype(np.int64)
    ir = r_edges.assign(batch.r)
    ic = c_edges.assign(batch.c)
    nr, nc = r_edges.bins, c_edges.bins
    flat = (iy * nr + ir) * nc + ic
    counts = np.bincount(flat, minlength=2 * nr * nc).reshape(2, nr, nc)
    return normalize(counts.astype(float))
