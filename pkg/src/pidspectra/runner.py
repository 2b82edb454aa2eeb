"""Orchestration of simulation cells and grids.

A cell is one run of the pipeline: sample inputs, (fit the bias for
unipolar runs), evaluate the transfer function, draw Bernoulli outputs
through the logistic link, bin everything into a joint array and decompose
it with the requested methods.

Seeding: a master seed expands to per-cell seeds through a keyed hash of the
cell coordinates, so adding cells to a grid never perturbs existing ones.
Within a cell, independent child streams are spawned for input sampling and
output simulation.  Cells are independent work units; results are assembled
in a canonical order, so serial and parallel runs agree exactly.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import binning, models, transfer
from .broja import NonConvergenceError
from .dist import JointDist3, shannon_summary
from .pid import Spectrum, complete_spectrum, decompose
from .models import RNG_ALGORITHM

MODELS = ("bgm", "sbg")
TRANSFER_ORDER = transfer.TAGS
METHOD_ORDER = ("imin", "broja", "ccs")

SEED_POLICY = ("per-cell seed = first 8 bytes of blake2b(cell coordinates, key=master seed); "
               "input and output streams are children 0 and 1 of SeedSequence(cell seed)")


class GridError(ValueError):
    pass


class MissingCellError(KeyError):
    pass


@dataclass(frozen=True)
class CellConfig:
    """One experiment cell of the simulation grid."""

    model: str
    transfer: str
    scenario: int
    d: float
    sigma: float = 0.3
    n: int = 1_000_000
    seed: int = 0
    methods: tuple = METHOD_ORDER
    normalize: bool | None = None  # None: follow the model convention
    bins: int = binning.DEFAULT_BINS

    def __post_init__(self):
        if self.model not in MODELS:
            raise GridError(f"unknown model {self.model!r}; expected one of {MODELS}")
        tag = transfer.parse_tag(self.transfer)
        object.__setattr__(self, "transfer", tag)
        if self.n < 1_000:
            raise GridError(f"n={self.n} is below the minimum of 1000")
        methods = tuple(self.methods)
        if not methods:
            raise GridError("at least one decomposition method is required")
        unknown = [m for m in methods if m not in METHOD_ORDER]
        if unknown:
            raise GridError(f"unknown methods {unknown}; expected subset of {METHOD_ORDER}")
        object.__setattr__(self, "methods", methods)

    @property
    def resolved_normalize(self) -> bool:
        # figure convention: mixture-model spectra normalized, unipolar absolute
        return self.model == "bgm" if self.normalize is None else self.normalize

    def sort_key(self):
        return (
            self.model,
            TRANSFER_ORDER.index(self.transfer),
            self.scenario,
            self.d,
        )


@dataclass(frozen=True)
class GridRow:
    config: CellConfig
    method: str
    spectrum: Spectrum


@dataclass
class GridResult:
    rows: list
    errors: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def row(self, model, transfer_tag, scenario, d, method) -> GridRow:
        tag = transfer.parse_tag(transfer_tag)
        for r in self.rows:
            cfg = r.config
            if (cfg.model == model and cfg.transfer == tag and cfg.scenario == scenario
                    and cfg.d == d and r.method == method):
                return r
        raise MissingCellError(
            f"no row for ({model}, {transfer_tag}, scenario {scenario}, d={d}, {method})")


def derive_cell_seed(master_seed: int, config: CellConfig) -> int:
    """Deterministic per-cell seed from the master seed and coordinates."""
    coords = (f"model={config.model}|transfer={config.transfer}"
              f"|scenario={config.scenario}|d={config.d!r}|sigma={config.sigma!r}"
              f"|n={config.n}|bins={config.bins}")
    h = hashlib.blake2b(coords.encode(), digest_size=8, key=str(master_seed).encode())
    return int.from_bytes(h.digest(), "big")


def _simulate_cell(config: CellConfig):
    """Sample, push through the transfer pipeline and bin; returns
    (dist, batch, diagnostics)."""
    sc = models.scenario(config.scenario)
    ss = np.random.SeedSequence(config.seed)
    seed_inputs, seed_outputs = ss.spawn(2)

    if config.model == "bgm":
        spec = models.mixture_spec(config.d, config.sigma, sc.s1, sc.s2)
        batch = models.sample_bgm(spec, config.n, seed_inputs)
        bias = 0.0
    else:
        batch = models.sample_sbg(sc.s1, sc.s2, config.d, config.sigma, config.n, seed_inputs)
        bias = transfer.fit_bias(config.transfer, batch)

    kind = transfer.TransferKind(tag=config.transfer, bias=bias)
    raw = transfer.raw_transfer(config.transfer, batch.r, batch.c) - bias
    t = np.clip(raw, -transfer.CLAMP, transfer.CLAMP)
    theta = transfer.output_prob(t)
    batch.y = transfer.simulate_outputs(theta, seed_outputs)

    if config.model == "bgm":
        r_edges = binning.bgm_edges(batch.r, config.bins)
        c_edges = binning.bgm_edges(batch.c, config.bins)
    else:
        r_edges = binning.sbg_edges(batch.r, config.bins)
        c_edges = binning.sbg_edges(batch.c, config.bins)
    dist = binning.build_joint(batch, r_edges, c_edges)

    diagnostics = {
        "bias": bias,
        "max_abs_t": float(np.max(np.abs(raw))),
        "clamp_fraction": float(np.mean(np.abs(raw) >= transfer.CLAMP)),
        "transfer_kind": kind,
    }
    return dist, batch, diagnostics


def run_cell_detailed(config: CellConfig, broja_tol: float = 1e-10,
                      ccs_variant: str = "observed-joint"):
    """Full pipeline for one cell; returns (spectra, dist, diagnostics)."""
    dist, _, diagnostics = _simulate_cell(config)
    spectra = decompose_all(dist, config.methods, config.resolved_normalize,
                            broja_tol=broja_tol, ccs_variant=ccs_variant)
    return spectra, dist, diagnostics


def run_cell(config: CellConfig, broja_tol: float = 1e-10) -> list:
    """Run one cell and return its spectra, one per requested method."""
    spectra, _, _ = run_cell_detailed(config, broja_tol)
    return spectra


def decompose_all(dist: JointDist3, methods, normalize: bool,
                  broja_tol: float = 1e-10,
                  ccs_variant: str = "observed-joint") -> list:
    summary = shannon_summary(dist)
    spectra = []
    for method in methods:
        comps = decompose(dist, method, summary=summary,
                          ccs_variant=ccs_variant, broja_tol=broja_tol)
        spectra.append(complete_spectrum(comps, summary, normalize=normalize))
    return spectra


def expand_grid(doc: dict) -> list:
    """Expand a grid specification document into concrete cell configs.

    The document mirrors CellConfig fields, with lists where a factor takes
    several levels: model(s), transfers, scenarios, correlations, plus
    sigma, n, master_seed, methods, normalize and bins.
    """
    def as_list(key, default=None):
        val = doc.get(key, default)
        if val is None:
            raise GridError(f"grid config is missing {key!r}")
        return val if isinstance(val, (list, tuple)) else [val]

    model_list = [m.lower() for m in as_list("model")]
    transfers = [transfer.parse_tag(t) for t in as_list("transfers")]
    scenarios = [int(s) for s in as_list("scenarios")]
    correlations = [float(x) for x in as_list("correlations")]
    if not (model_list and transfers and scenarios and correlations):
        raise GridError("every grid factor needs at least one level")
    methods = tuple(doc.get("methods", list(METHOD_ORDER)))
    master = int(doc.get("master_seed", 0))
    sigma = float(doc.get("sigma", 0.3))
    n = int(doc.get("n", 1_000_000))
    normalize = doc.get("normalize")
    bins = int(doc.get("bins", binning.DEFAULT_BINS))

    cells = []
    for model in model_list:
        for tag in transfers:
            for sid in scenarios:
                for d in correlations:
                    cfg = CellConfig(model=model, transfer=tag, scenario=sid, d=d,
                                     sigma=sigma, n=n, seed=0, methods=methods,
                                     normalize=normalize, bins=bins)
                    cells.append(replace(cfg, seed=derive_cell_seed(master, cfg)))
    return cells


def _run_cell_job(args):
    config, broja_tol = args
    try:
        spectra, _, diag = run_cell_detailed(config, broja_tol)
        diag = {k: v for k, v in diag.items() if k != "transfer_kind"}
        return config, spectra, diag, None
    except NonConvergenceError as exc:
        return config, None, None, ("non-convergence", str(exc))
    except Exception as exc:  # cell failures must not abort the grid
        return config, None, None, (type(exc).__name__, str(exc))


def run_grid(cells, master_seed: int | None = None, jobs: int = 1,
             broja_tol: float = 1e-10) -> GridResult:
    """Run every cell and assemble rows in canonical order.

    Per-cell errors are collected, not raised; rows for failing cells are
    simply absent.  The result is identical for any ``jobs`` value.
    """
    cells = list(cells)
    if not cells:
        raise GridError("no cells to run")
    t0 = time.monotonic()
    work = [(cfg, broja_tol) for cfg in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell_job, work))
    else:
        outcomes = [_run_cell_job(w) for w in work]

    rows, errors, diags = [], [], {}
    for config, spectra, diag, err in outcomes:
        if err is not None:
            errors.append({"cell": config, "kind": err[0], "message": err[1]})
            continue
        diags[config.sort_key()] = diag
        for spectrum in spectra:
            rows.append(GridRow(config=config, method=spectrum.method, spectrum=spectrum))
    rows.sort(key=lambda r: (*r.config.sort_key(), METHOD_ORDER.index(r.method)))
    errors.sort(key=lambda e: e["cell"].sort_key())

    metadata = {
        "master_seed": master_seed,
        "seed_policy": SEED_POLICY,
        "rng": RNG_ALGORITHM,
        "cells": len(cells),
        "failed": len(errors),
        "elapsed_s": round(time.monotonic() - t0, 3),
        "diagnostics": {str(k): v for k, v in sorted(diags.items())},
    }
    return GridResult(rows=rows, errors=errors, metadata=metadata)


QUANTITIES = ("unq_r", "unq_c", "shd", "syn", "hres", "hy", "i_yr", "i_yc", "total")


def spectrum_quantity(spectrum: Spectrum, quantity: str) -> float:
    """Named quantity of a spectrum in absolute units (bits)."""
    s = spectrum.in_bits()
    if quantity == "i_yr":
        return s.unq_r + s.shd
    if quantity == "i_yc":
        return s.unq_c + s.shd
    if quantity == "total":
        return s.unq_r + s.unq_c + s.shd + s.syn
    if quantity in ("unq_r", "unq_c", "shd", "syn", "hres", "hy"):
        return getattr(s, quantity)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


def compare_cells(result: GridResult, cell_a: tuple, cell_b: tuple, quantity: str) -> float:
    """Difference of a named quantity between two rows, in bits.

    Cells are addressed as (model, transfer, scenario, d, method) tuples.
    """
    row_a = result.row(*cell_a)
    row_b = result.row(*cell_b)
    return spectrum_quantity(row_a.spectrum, quantity) - spectrum_quantity(row_b.spectrum, quantity)
