"""Shannon-information algebra on small discrete trivariate distributions.

The central object is a joint probability array over (Y, R, C) where Y is a
binary output and R, C are binned inputs (canonically 2 x 6 x 6).  All
information quantities are in bits.  Cells below ``ZERO_CELL`` are treated as
exact zeros before any log evaluation, so zero-probability states contribute
nothing to entropy sums.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

# Cells below this are treated as exact zeros before log evaluation.
ZERO_CELL = 1e-15

# Negative information values above this magnitude indicate a real bug rather
# than round-off; values in [-NEG_ROUNDOFF, 0) are clipped to 0 on report.
NEG_ROUNDOFF = 1e-12

AXES = {"y": 0, "r": 1, "c": 2}


class DistributionError(ValueError):
    """Invalid probability data."""


class AllZeroError(DistributionError):
    """The distribution carries no positive mass."""


class NegativeMassError(DistributionError):
    """A cell carries negative mass."""


class ConsistencyError(RuntimeError):
    """An internal information identity failed beyond round-off."""


@dataclass(frozen=True)
class JointDist3:
    """Normalized joint distribution over (Y, R, C), axis order fixed.

    Y index 0 corresponds to output -1, index 1 to output +1.  The array is
    read-only; all operations on it are pure.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 3:
            raise DistributionError(f"expected a 3-axis array, got shape {p.shape}")
        if (p < 0).any():
            raise NegativeMassError("negative cell in probability array")
        total = p.sum()
        if not np.isfinite(total) or abs(total - 1.0) > 1e-12:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def ny(self) -> int:
        return self.p.shape[0]

    @property
    def nr(self) -> int:
        return self.p.shape[1]

    @property
    def nc(self) -> int:
        return self.p.shape[2]

    def marginal(self, axes: str) -> np.ndarray:
        """Marginal probability array over the named axes, e.g. ``"yr"``."""
        keep = _axis_indices(axes)
        drop = tuple(i for i in range(3) if i not in keep)
        m = self.p.sum(axis=drop)
        # restore requested axis order (sum preserves relative order only)
        order = tuple(sorted(range(len(keep)), key=lambda i: keep[i]))
        inv = tuple(order.index(i) for i in range(len(keep)))
        return m.transpose(inv) if m.ndim > 1 else m

    def swap_rc(self) -> "JointDist3":
        """Distribution with the R and C axes exchanged."""
        return JointDist3(self.p.transpose(0, 2, 1))

    def to_json_dict(self) -> dict:
        return {"dims": [self.ny, self.nr, self.nc], "p": self.p.ravel().tolist()}


@dataclass(frozen=True)
class InfoSummary:
    """Classical Shannon quantities of one distribution, in bits."""

    hy: float
    hres: float
    i_yrc: float
    i_yr: float
    i_yc: float
    i_yr_given_c: float
    i_yc_given_r: float


def _axis_indices(axes) -> tuple[int, ...]:
    if isinstance(axes, str):
        labels = list(axes)
    else:
        labels = list(axes)
    idx = []
    for a in labels:
        key = str(a).lower()
        if key not in AXES:
            raise ValueError(f"unknown axis {a!r}; expected subset of y, r, c")
        if AXES[key] in idx:
            raise ValueError(f"axis {a!r} repeated")
        idx.append(AXES[key])
    if not idx:
        raise ValueError("at least one axis required")
    return tuple(idx)


def normalize(weights) -> JointDist3:
    """Normalize nonnegative counts or weights into a JointDist3.

    Relative cell ratios are preserved exactly.  Raises AllZeroError when no
    cell is positive and NegativeMassError on any negative cell.
    """
    arr = np.asarray(weights, dtype=float)
    if arr.ndim != 3:
        raise DistributionError(f"expected a 3-axis array, got shape {arr.shape}")
    if (arr < 0).any():
        raise NegativeMassError("negative cell in weight array")
    total = arr.sum()
    if total <= 0:
        raise AllZeroError("all cells are zero")
    return JointDist3(arr / total)


def entropy_of(p: np.ndarray) -> float:
    """Shannon entropy in bits of a probability array; 0 log 0 is 0."""
    flat = np.asarray(p, dtype=float).ravel()
    mask = flat > ZERO_CELL
    vals = flat[mask]
    return float(-np.sum(vals * np.log2(vals)))


def entropy(dist: JointDist3, axes) -> float:
    """Entropy in bits of the marginal over the chosen axes of ``dist``."""
    keep = _axis_indices(axes)
    drop = tuple(i for i in range(3) if i not in keep)
    return entropy_of(dist.p.sum(axis=drop) if drop else dist.p)


def shannon_summary(dist: JointDist3) -> InfoSummary:
    """All Shannon quantities needed downstream, computed from marginals.

    Mutual-information round-off in [-NEG_ROUNDOFF, 0) is clipped to 0;
    anything more negative raises ConsistencyError.
    """
    h_y = entropy(dist, "y")
    h_r = entropy(dist, "r")
    h_c = entropy(dist, "c")
    h_yr = entropy(dist, "yr")
    h_yc = entropy(dist, "yc")
    h_rc = entropy(dist, "rc")
    h_yrc = entropy_of(dist.p)

    i_yrc = h_y + h_rc - h_yrc
    i_yr = h_y + h_r - h_yr
    i_yc = h_y + h_c - h_yc
    i_yr_given_c = h_yc + h_rc - h_c - h_yrc
    i_yc_given_r = h_yr + h_rc - h_r - h_yrc
    hres = h_yrc - h_rc

    cleaned = [_clip_roundoff(v, name) for v, name in [
        (i_yrc, "I(Y;R,C)"),
        (i_yr, "I(Y;R)"),
        (i_yc, "I(Y;C)"),
        (i_yr_given_c, "I(Y;R|C)"),
        (i_yc_given_r, "I(Y;C|R)"),
        (hres, "H(Y|R,C)"),
    ]]
    i_yrc, i_yr, i_yc, i_yr_given_c, i_yc_given_r, hres = cleaned
    return InfoSummary(
        hy=h_y,
        hres=hres,
        i_yrc=i_yrc,
        i_yr=i_yr,
        i_yc=i_yc,
        i_yr_given_c=i_yr_given_c,
        i_yc_given_r=i_yc_given_r,
    )


def _clip_roundoff(value: float, name: str) -> float:
    if value >= 0.0:
        return value
    if value >= -NEG_ROUNDOFF:
        return 0.0
    raise ConsistencyError(f"{name} = {value} is negative beyond round-off")


def from_json_dict(doc: dict) -> JointDist3:
    """Parse the shared JSON probability-array document.

    Expects ``{"dims": [ny, nr, nc], "p": [... row-major ...]}``.  The flat
    list may hold counts or probabilities; it is normalized on load.
    """
    try:
        dims = doc["dims"]
        flat = doc["p"]
    except (KeyError, TypeError) as exc:
        raise DistributionError("document must carry 'dims' and 'p'") from exc
    if len(dims) != 3 or any(int(d) <= 0 for d in dims):
        raise DistributionError(f"dims must be three positive integers, got {dims!r}")
    dims = tuple(int(d) for d in dims)
    expected = dims[0] * dims[1] * dims[2]
    if len(flat) != expected:
        raise DistributionError(
            f"p has {len(flat)} entries, expected {expected} for dims {dims}")
    return normalize(np.asarray(flat, dtype=float).reshape(dims))


def load_json(path) -> JointDist3:
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def save_json(dist: JointDist3, path) -> None:
    with open(path, "w") as fh:
        json.dump(dist.to_json_dict(), fh)
        fh.write("\n")
