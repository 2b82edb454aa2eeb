"""Golden-file loading and verification.

A golden file stores reference decomposition values for named distributions
together with provenance metadata:

    {
      "metadata": {"tool": ..., "version": ..., "tolerance": {...}},
      "distributions": {"and": {"dims": [2, 2, 2], "p": [...]}, ...},
      "entries": [
        {"dist": "and", "method": "broja",
         "unq_r": 0.0, "unq_c": 0.0, "shd": 0.311278, "syn": 0.5,
         "atol": 1e-6},
        ...
      ]
    }

Entries are verified two ways: internal consistency of the stored values
against the stored distribution's mutual informations, and agreement of the
locally computed decomposition with the stored values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dist import from_json_dict, shannon_summary
from .pid import decompose

COMPONENT_KEYS = ("unq_r", "unq_c", "shd", "syn")
DEFAULT_ATOL = 1e-6
CONSISTENCY_ATOL = 1e-6


@dataclass
class GoldenCheck:
    dist_id: str
    method: str
    ok: bool
    max_err: float
    message: str


def load_goldens(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("distributions", "entries"):
        if key not in doc:
            raise ValueError(f"golden file is missing {key!r}")
    return doc


def verify_goldens(doc: dict, broja_tol: float = 1e-10) -> list:
    """Check every entry; returns one GoldenCheck per entry.

    NonConvergenceError from the broja solver propagates to the caller so
    it can be reported distinctly from a value mismatch.
    """
    dists = {name: from_json_dict(d) for name, d in doc["distributions"].items()}
    checks = []
    for entry in doc["entries"]:
        dist_id = entry["dist"]
        method = entry["method"]
        atol = float(entry.get("atol", DEFAULT_ATOL))
        dist = dists[dist_id]
        summary = shannon_summary(dist)

        stored = {k: float(entry[k]) for k in COMPONENT_KEYS}
        residuals = (
            stored["unq_r"] + stored["shd"] - summary.i_yr,
            stored["unq_c"] + stored["shd"] - summary.i_yc,
            stored["unq_r"] + stored["syn"] - summary.i_yr_given_c,
            stored["unq_c"] + stored["syn"] - summary.i_yc_given_r,
        )
        worst_residual = max(abs(x) for x in residuals)
        if worst_residual > CONSISTENCY_ATOL:
            checks.append(GoldenCheck(
                dist_id, method, False, worst_residual,
                f"stored values break the consistency identities by {worst_residual:.2e}"))
            continue

        variant = entry.get("ccs_variant", "observed-joint")
        computed = decompose(dist, method, summary=summary,
                             ccs_variant=variant, broja_tol=broja_tol)
        errs = {k: abs(getattr(computed, k) - stored[k]) for k in COMPONENT_KEYS}
        worst_key = max(errs, key=errs.get)
        ok = errs[worst_key] <= atol
        message = ("ok" if ok else
                   f"{worst_key} differs by {errs[worst_key]:.3e} (atol {atol:g})")
        checks.append(GoldenCheck(dist_id, method, ok, errs[worst_key], message))
    return checks
