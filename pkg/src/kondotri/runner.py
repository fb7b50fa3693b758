"""Orchestration shared by the service endpoints: config -> records -> reports."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .config import RunConfig, run_metadata
from .dataset import dataset_text
from .errors import FitDomainError
from .scaling import (
    ScalingDataset,
    build_fit_report,
    exponent_identity_residual,
    fit_ansatz,
    fit_power_law,
    optimize_collapse,
    rescaled_table,
    synth_generate,
)
from .sweep import SweepRecord, SweepSpec, locate_peak, run_sweep

FIT_MODES = ("power", "collapse", "ansatz", "identity")


def sweep_from_config(config: RunConfig) -> tuple[list[SweepRecord], dict]:
    """All sweeps requested by a config (one per J' value), canonically ordered."""
    grid = config.grid.resolve()
    records: list[SweepRecord] = []
    for jp in config.model.j_prime:
        spec = SweepSpec(
            kind=config.model.kind,
            j_prime=jp,
            sizes=tuple(config.model.sizes),
            control_grid=grid,
            j2_ratio=config.model.j2_ratio,
            measures=tuple(config.analysis.measures),
            seed=config.solver.seed,
            tol=config.solver.tol,
            max_iter=config.solver.max_iter,
        )
        records.extend(run_sweep(spec, workers=config.solver.workers))
    records.sort(key=lambda r: (r.j_prime,) + r.sort_key)
    return records, run_metadata(config)


def _peak_gc(dataset: ScalingDataset, quiet: bool = False) -> float:
    """Operational g_c: refined peak of the measure at the largest size."""
    largest = float(dataset.sizes[-1])
    sel = dataset.n == largest
    curve = list(zip(dataset.g[sel].tolist(), dataset.e[sel].tolist()))
    if quiet:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return locate_peak(curve, refine=True, n_total=int(largest)).g_peak
    return locate_peak(curve, refine=True, n_total=int(largest)).g_peak


def _resolve_gc(dataset: ScalingDataset, gc_mode: str, gc_value: float | None):
    """(pinned g_c or a starting estimate, whether g_c is to be fitted).

    The CSV schema carries no g_c, so even in "fit" mode the optimizers are
    seeded from the peak estimate; for monotone (one-sided) data that seed
    sits on the grid edge, which is what lets the ansatz fit flag g_c as
    unidentifiable.
    """
    if gc_mode == "fixed":
        return float(gc_value), False
    if gc_mode == "fit":
        return _peak_gc(dataset, quiet=True), True
    return _peak_gc(dataset), False


def fit_records(
    records: list[SweepRecord],
    mode: str,
    measure: str = "e1",
    gc_mode: str = "peak",
    gc_value: float | None = None,
    restarts: int = 8,
) -> tuple[dict, str | None]:
    """One fit mode applied to a record list; returns (report, rescaled CSV or None)."""
    if mode not in ("power", "collapse", "ansatz"):
        raise ValueError(f"unknown fit mode {mode!r}")
    dataset = ScalingDataset.from_records(records, measure)
    settings = {"mode": mode, "measure": measure, "gc_policy": gc_mode, "restarts": restarts}
    gc_pin, fit_gc = _resolve_gc(dataset, gc_mode, gc_value)

    if mode == "power":
        if fit_gc:
            raise FitDomainError("power mode cannot fit g_c; use gc_policy peak or fixed=V")
        pts = []
        for size in dataset.sizes:
            sel = dataset.n == size
            order = np.argsort(dataset.g[sel])
            e_at_gc = float(np.interp(gc_pin, dataset.g[sel][order], dataset.e[sel][order]))
            pts.append((float(size), e_at_gc))
        fit = fit_power_law(pts)
        report = build_fit_report(
            measure, dataset.model, "power", settings,
            lam=fit.lam, g_c=gc_pin,
            residuals={"power_rms": fit.residual, "amplitude": fit.amplitude},
        )
        return report, None

    if mode == "collapse":
        fit = optimize_collapse(dataset, fit_gc=fit_gc, restarts=restarts, g_c=gc_pin)
        report = build_fit_report(
            measure, dataset.model, "collapse", settings,
            nu=fit.nu, beta=fit.beta, g_c=fit.g_c, quality=fit.quality,
            residuals={"collapse_quality": fit.quality},
        )
        return report, rescaled_table(dataset, fit.nu, fit.beta, fit.g_c)

    fit = fit_ansatz(dataset, fit_gc=fit_gc, g_c=gc_pin)
    settings = dict(settings, a_coeff=fit.a_coeff, b_coeff=fit.b_coeff)
    report = build_fit_report(
        measure, dataset.model, "ansatz", settings,
        beta=fit.beta, lam=fit.lam, g_c=fit.g_c,
        residuals={"ansatz_rms": fit.residual},
    )
    return report, None


def identity_report(beta: float, nu: float, lam: float) -> dict:
    resid = exponent_identity_residual(beta, nu, lam)
    return build_fit_report(
        measure="", model="", mode="identity",
        settings={"mode": "identity"},
        nu=nu, beta=beta, lam=lam,
        residuals={"identity": resid},
    )


def synth_records(
    kind: str,
    params: dict,
    sizes,
    grid,
    noise: float = 0.0,
    seed: int = 0,
    measure: str = "e1",
    model: str = "2ikm",
    j_prime: float = 0.4,
) -> list[SweepRecord]:
    """Synthetic dataset rendered into the sweep CSV schema (other columns NaN)."""
    ds = synth_generate(kind, params, sizes, grid, noise=noise, seed=seed, measure=measure)
    nan = float("nan")
    records = []
    for g, n, e in zip(ds.g.tolist(), ds.n.tolist(), ds.e.tolist()):
        values = {"e1": nan, "e2": nan}
        values[measure] = e
        records.append(SweepRecord(
            model=model, j_prime=j_prime, control=g, n_total=int(n), energy=nan,
            e1=values["e1"], e2=values["e2"],
            pi_a=nan, pi_b=nan, pi_c=nan,
            n_a_bc=nan, n_b_ac=nan, n_c_ab=nan, n_ab=nan, n_ac=nan, n_bc=nan,
            converged=True,
        ))
    records.sort(key=lambda r: r.sort_key)
    return records


def synth_csv(**kwargs) -> str:
    return dataset_text(synth_records(**kwargs))
