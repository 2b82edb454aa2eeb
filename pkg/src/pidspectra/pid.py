"""Partial information decompositions of a trivariate distribution.

Three methods are implemented: the specific-information minimum (``imin``),
the constrained-optimization unique information (``broja``, see
:mod:`pidspectra.broja`), and the pointwise common-surprisal sign rule
(``ccs``).  Each method determines the shared component (or the unique one,
for broja); the remaining components follow from the four consistency
identities that tie a decomposition to the classical mutual informations:

    I(Y;R)   = UnqR + Shd          I(Y;R|C) = UnqR + Syn
    I(Y;C)   = UnqC + Shd          I(Y;C|R) = UnqC + Syn

The five-term spectrum (UnqR, UnqC, Shd, Syn, Hres) always sums to H(Y).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dist import JointDist3, InfoSummary, ZERO_CELL, shannon_summary

# Local information terms with magnitude below this are exact zeros for the
# ccs sign rule; a zero excludes the state.
CCS_SIGN_EPS = 1e-12

# imin/broja components in [-COMPONENT_CLIP, 0) are round-off and reported as 0.
COMPONENT_CLIP = 1e-9

CCS_VARIANTS = ("observed-joint", "pairwise-maxent")

# Decomposition identifiers accepted by the registry.  proj and dep are
# reserved for externally defined methods and are not computable here.
METHOD_IDS = ("imin", "broja", "ccs")
RESERVED_METHOD_IDS = ("proj", "dep")


class UnsupportedMethodError(ValueError):
    """Requested a decomposition method the registry cannot compute."""


class ZeroEntropyOutput(Exception):
    """Normalization was requested for a distribution with H(Y) ~ 0."""


@dataclass(frozen=True)
class PidComponents:
    """The four decomposition components of one method, in bits."""

    method: str
    unq_r: float
    unq_c: float
    shd: float
    syn: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.unq_r, self.unq_c, self.shd, self.syn)


@dataclass(frozen=True)
class Spectrum:
    """Five-component spectrum plus output entropy.

    When ``normalized`` is set the five terms are fractions of H(Y) and sum
    to 1; otherwise they are in bits and sum to H(Y).  ``zero_entropy``
    flags the degenerate case where normalization was requested but H(Y)
    vanishes; all five terms are then 0.
    """

    method: str
    unq_r: float
    unq_c: float
    shd: float
    syn: float
    hres: float
    hy: float
    normalized: bool = False
    zero_entropy: bool = False

    def terms(self) -> tuple[float, float, float, float, float]:
        return (self.unq_r, self.unq_c, self.shd, self.syn, self.hres)

    def in_bits(self) -> "Spectrum":
        """The same spectrum in absolute units, undoing normalization."""
        if not self.normalized:
            return self
        s = self.hy
        return replace(
            self,
            unq_r=self.unq_r * s,
            unq_c=self.unq_c * s,
            shd=self.shd * s,
            syn=self.syn * s,
            hres=self.hres * s,
            normalized=False,
        )


def specific_information(p_yx: np.ndarray) -> np.ndarray:
    """Per-output-state information I(Y=y; X) from a (ny, nx) joint array.

    I(Y=y;X) = sum_x p(x|y) log2( p(y|x) / p(y) ), with zero-probability
    states contributing nothing.
    """
    p_yx = np.asarray(p_yx, dtype=float)
    p_y = p_yx.sum(axis=1)
    p_x = p_yx.sum(axis=0)
    out = np.zeros(p_yx.shape[0])
    for y in range(p_yx.shape[0]):
        if p_y[y] <= ZERO_CELL:
            continue
        row = p_yx[y]
        mask = row > ZERO_CELL
        ratio = row[mask] / (p_x[mask] * p_y[y])
        out[y] = float(np.sum(row[mask] / p_y[y] * np.log2(ratio)))
    return out


def pid_imin(dist: JointDist3, summary: InfoSummary | None = None) -> PidComponents:
    """Specific-information-minimum decomposition.

    Shd is the expected minimum over sources of the specific information
    I(Y=y; source); the other components follow from the consistency
    identities.  All four components are nonnegative up to round-off.
    """
    if summary is None:
        summary = shannon_summary(dist)
    p_y = dist.marginal("y")
    spec_r = specific_information(dist.marginal("yr"))
    spec_c = specific_information(dist.marginal("yc"))
    shd = float(np.sum(p_y * np.minimum(spec_r, spec_c)))
    return _complete_from_shd("imin", shd, summary, clip=True)


def pid_ccs(
    dist: JointDist3,
    variant: str = "observed-joint",
    summary: InfoSummary | None = None,
) -> PidComponents:
    """Pointwise common-surprisal decomposition with the strict sign rule.

    For every state the two single-source local informations, the joint
    local information and their co-information are evaluated on ``q``; the
    state contributes q * coi to Shd only when all four are strictly of the
    same sign (an exact zero excludes the state).  ``variant`` selects
    whether q is the observed joint or the pairwise source-target
    maximum-entropy distribution.  Unique components may be negative.
    """
    if variant not in CCS_VARIANTS:
        raise ValueError(f"unknown ccs variant {variant!r}; expected one of {CCS_VARIANTS}")
    if summary is None:
        summary = shannon_summary(dist)
    q = dist.p if variant == "observed-joint" else maxent_pairwise(dist).p

    q_y = q.sum(axis=(1, 2))
    q_r = q.sum(axis=(0, 2))
    q_c = q.sum(axis=(0, 1))
    q_yr = q.sum(axis=2)
    q_yc = q.sum(axis=1)
    q_rc = q.sum(axis=0)

    shd = 0.0
    ny, nr, nc = q.shape
    for y in range(ny):
        for r in range(nr):
            for c in range(nc):
                mass = q[y, r, c]
                if mass <= ZERO_CELL:
                    continue
                i_r = np.log2(q_yr[y, r] / (q_y[y] * q_r[r]))
                i_c = np.log2(q_yc[y, c] / (q_y[y] * q_c[c]))
                i_rc = np.log2(mass / (q_y[y] * q_rc[r, c]))
                coi = i_r + i_c - i_rc
                terms = (i_r, i_c, i_rc, coi)
                if any(abs(t) < CCS_SIGN_EPS for t in terms):
                    continue
                if all(t > 0 for t in terms) or all(t < 0 for t in terms):
                    shd += mass * coi
    return _complete_from_shd("ccs", shd, summary, clip=False)


def maxent_pairwise(dist: JointDist3, via: str = "product") -> JointDist3:
    """Maximum-entropy distribution preserving the (Y,R) and (Y,C) marginals.

    The closed form is Q*(y,r,c) = P(y,r) P(c|y); sources are conditionally
    independent given the output, so I(R;C|Y) = 0.  ``via="ipf"`` computes
    the same distribution by iterative proportional fitting from the uniform
    start, which lands on the closed form after one full sweep.
    """
    if via == "product":
        q = _pairwise_product(dist.p)
    elif via == "ipf":
        q = _pairwise_ipf(dist.p)
    else:
        raise ValueError(f"unknown construction {via!r}; expected 'product' or 'ipf'")
    return JointDist3(q)


def _pairwise_product(p: np.ndarray) -> np.ndarray:
    p_y = p.sum(axis=(1, 2))
    p_yr = p.sum(axis=2)
    p_yc = p.sum(axis=1)
    q = np.zeros_like(p)
    for y in range(p.shape[0]):
        if p_y[y] <= 0:
            continue
        q[y] = np.outer(p_yr[y], p_yc[y]) / p_y[y]
    return q


def _pairwise_ipf(p: np.ndarray, sweeps: int = 50, tol: float = 1e-13) -> np.ndarray:
    p_yr = p.sum(axis=2)
    p_yc = p.sum(axis=1)
    q = np.full_like(p, 1.0 / p.size)
    for _ in range(sweeps):
        prev = q.copy()
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(q.sum(axis=2) > 0, p_yr / np.where(q.sum(axis=2) > 0, q.sum(axis=2), 1.0), 0.0)
        q = q * scale[:, :, None]
        qyc = q.sum(axis=1)
        scale = np.where(qyc > 0, p_yc / np.where(qyc > 0, qyc, 1.0), 0.0)
        q = q * scale[:, None, :]
        if np.max(np.abs(q - prev)) < tol:
            break
    return q


def _complete_from_shd(method: str, shd: float, summary: InfoSummary, clip: bool) -> PidComponents:
    unq_r = summary.i_yr - shd
    unq_c = summary.i_yc - shd
    syn = summary.i_yr_given_c - unq_r
    if clip:
        unq_r, unq_c, shd, syn = (_clip_component(v) for v in (unq_r, unq_c, shd, syn))
    return PidComponents(method=method, unq_r=unq_r, unq_c=unq_c, shd=shd, syn=syn)


def complete_from_unique_r(method: str, unq_r: float, summary: InfoSummary, clip: bool) -> PidComponents:
    shd = summary.i_yr - unq_r
    unq_c = summary.i_yc - shd
    syn = summary.i_yr_given_c - unq_r
    if clip:
        unq_r, unq_c, shd, syn = (_clip_component(v) for v in (unq_r, unq_c, shd, syn))
    return PidComponents(method=method, unq_r=unq_r, unq_c=unq_c, shd=shd, syn=syn)


def _clip_component(v: float) -> float:
    return 0.0 if -COMPONENT_CLIP <= v < 0.0 else v


def complete_spectrum(
    components: PidComponents,
    summary: InfoSummary,
    normalize: bool = False,
) -> Spectrum:
    """Attach residual entropy and optionally normalize by H(Y).

    With normalization requested and H(Y) below 1e-12 the spectrum is
    returned all-zero with ``zero_entropy`` set instead of dividing.
    """
    hres = summary.hres
    hy = summary.hy
    if normalize:
        if hy < 1e-12:
            return Spectrum(
                method=components.method,
                unq_r=0.0, unq_c=0.0, shd=0.0, syn=0.0, hres=0.0,
                hy=hy, normalized=True, zero_entropy=True,
            )
        return Spectrum(
            method=components.method,
            unq_r=components.unq_r / hy,
            unq_c=components.unq_c / hy,
            shd=components.shd / hy,
            syn=components.syn / hy,
            hres=hres / hy,
            hy=hy,
            normalized=True,
        )
    return Spectrum(
        method=components.method,
        unq_r=components.unq_r,
        unq_c=components.unq_c,
        shd=components.shd,
        syn=components.syn,
        hres=hres,
        hy=hy,
    )


def decompose(
    dist: JointDist3,
    method: str,
    summary: InfoSummary | None = None,
    ccs_variant: str = "observed-joint",
    broja_tol: float = 1e-10,
) -> PidComponents:
    """Run one registered decomposition method on ``dist``."""
    if summary is None:
        summary = shannon_summary(dist)
    if method == "imin":
        return pid_imin(dist, summary)
    if method == "ccs":
        return pid_ccs(dist, ccs_variant, summary)
    if method == "broja":
        from .broja import pid_broja

        components, _ = pid_broja(dist, tol=broja_tol, summary=summary)
        return components
    if method in RESERVED_METHOD_IDS:
        raise UnsupportedMethodError(
            f"method {method!r} is reserved but not computable by this package")
    raise UnsupportedMethodError(f"unknown method {method!r}")
