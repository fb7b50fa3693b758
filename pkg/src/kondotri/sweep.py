"""Control-parameter sweeps over (g, N) grids and peak extraction.

A sweep solves one ground state per grid point and evaluates the requested
entanglement measures.  Points are independent work items; failures are
recorded per point so a long sweep survives one bad solve.  Records are
always returned in canonical (N, g) order regardless of execution order.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .entanglement import default_partition, tripartite_measures
from .errors import FitDomainError, SweepError
from .models import ModelKind, ModelParams, build_model, sector_basis
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, ground_state

MEASURE_CHOICES = ("e1", "e2", "negativities")


class PeakBoundaryWarning(UserWarning):
    """Peak sits on the grid edge; the true maximum may lie outside."""


def linear_grid(lo: float, hi: float, count: int) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, count).tolist())


def log_grid(lo: float, hi: float, count: int) -> tuple[float, ...]:
    if lo <= 0 or hi <= 0:
        raise ValueError("log grid needs positive endpoints")
    return tuple(np.geomspace(lo, hi, count).tolist())


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a model template, a control grid, and a size ladder."""

    kind: ModelKind
    j_prime: float
    sizes: tuple[int, ...]
    control_grid: tuple[float, ...]
    j2_ratio: float = 0.2412
    measures: tuple[str, ...] = ("e1", "e2")
    seed: int = 0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "control_grid", tuple(float(g) for g in self.control_grid))
        object.__setattr__(self, "measures", tuple(self.measures))
        if len(self.sizes) == 0:
            raise ValueError("empty size list")
        if len(self.control_grid) == 0:
            raise ValueError("empty control grid")
        grid = np.asarray(self.control_grid)
        if len(grid) > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("control grid must be strictly increasing")
        want_odd = self.kind is ModelKind.TWO_CHANNEL_KONDO
        for n in self.sizes:
            if n % 2 != (1 if want_odd else 0):
                raise ValueError(
                    f"size {n} must be {'odd' if want_odd else 'even'} for {self.kind.value}"
                )
        bad = [m for m in self.measures if m not in MEASURE_CHOICES]
        if bad:
            raise ValueError(f"unknown measures {bad}; choose from {MEASURE_CHOICES}")

    def n_left(self, n_total: int) -> int:
        if self.kind is ModelKind.TWO_CHANNEL_KONDO:
            return (n_total - 1) // 2
        return n_total // 2

    def params_at(self, n_total: int, control: float) -> ModelParams:
        half = self.n_left(n_total)
        return ModelParams(
            kind=self.kind,
            j_prime=self.j_prime,
            control=control,
            n_left=half,
            n_right=half,
            j2_ratio=self.j2_ratio,
        )

    @property
    def pairwise_needed(self) -> bool:
        return any(m in ("e2", "negativities") for m in self.measures)


@dataclass(frozen=True)
class SweepRecord:
    """One grid point; fields mirror the dataset CSV columns exactly."""

    model: str
    j_prime: float
    control: float
    n_total: int
    energy: float
    e1: float
    e2: float
    pi_a: float
    pi_b: float
    pi_c: float
    n_a_bc: float
    n_b_ac: float
    n_c_ab: float
    n_ab: float
    n_ac: float
    n_bc: float
    converged: bool
    error: str | None = field(default=None, compare=False)
    diagnostics: dict | None = field(default=None, compare=False)

    @property
    def sort_key(self) -> tuple:
        return (self.n_total, self.control)


_CSV_FLOAT_FIELDS = tuple(
    f.name for f in fields(SweepRecord) if f.name not in ("model", "n_total", "converged", "error", "diagnostics")
)


def _failed_record(spec: SweepSpec, n_total: int, control: float, message: str) -> SweepRecord:
    nan = float("nan")
    return SweepRecord(
        model=spec.kind.value, j_prime=spec.j_prime, control=control, n_total=n_total,
        energy=nan, e1=nan, e2=nan, pi_a=nan, pi_b=nan, pi_c=nan,
        n_a_bc=nan, n_b_ac=nan, n_c_ab=nan, n_ab=nan, n_ac=nan, n_bc=nan,
        converged=False, error=message,
    )


def solve_point(spec: SweepSpec, n_total: int, control: float) -> SweepRecord:
    """Ground state plus measures for one (N, g) point; never raises."""
    try:
        params = spec.params_at(n_total, control)
        basis = sector_basis(params.n_total, params.ground_sector())
        op = build_model(params, basis)
        gs = ground_state(op, tol=spec.tol, max_iter=spec.max_iter, seed=spec.seed)
        m = tripartite_measures(
            gs.vector, default_partition(params), include_pairwise=spec.pairwise_needed
        )
        negs = m.negativities
        return SweepRecord(
            model=params.kind.value, j_prime=spec.j_prime, control=control,
            n_total=n_total, energy=gs.energy,
            e1=m.e1, e2=m.e2, pi_a=m.pi_a, pi_b=m.pi_b, pi_c=m.pi_c,
            n_a_bc=negs.n_a_bc, n_b_ac=negs.n_b_ac, n_c_ab=negs.n_c_ab,
            n_ab=negs.n_ab, n_ac=negs.n_ac, n_bc=negs.n_bc,
            converged=True,
            diagnostics={"iterations": gs.iterations, "residual": gs.residual},
        )
    except Exception as exc:  # record-and-continue: one bad point must not kill a sweep
        return _failed_record(spec, n_total, control, f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """All (N, g) grid points of a sweep, canonically ordered by (N, g)."""
    points = [(n, g) for n in spec.sizes for g in spec.control_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(solve_point, *zip(*[(spec, n, g) for n, g in points])))
    else:
        records = [solve_point(spec, n, g) for n, g in points]
    records.sort(key=lambda r: r.sort_key)
    if all(not r.converged for r in records):
        raise SweepError(f"all {len(records)} grid points failed; first: {records[0].error}")
    return records


@dataclass(frozen=True)
class PeakEstimate:
    g_peak: float
    e_peak: float
    method: str  # "grid-argmax" or "parabolic-refined"
    n_total: int | None = None
    boundary: bool = False


def locate_peak(curve, refine: bool = True, n_total: int | None = None) -> PeakEstimate:
    """Grid argmax of an (g, E) curve, optionally parabola-refined.

    Ties break toward smaller g.  An argmax on the grid edge cannot be
    refined; it is returned as-is under a PeakBoundaryWarning.
    """
    pts = sorted((float(g), float(e)) for g, e in curve)
    if len(pts) < 3:
        raise ValueError(f"need >= 3 points to locate a peak, got {len(pts)}")
    g = np.array([p[0] for p in pts])
    e = np.array([p[1] for p in pts])
    i = int(np.argmax(e))
    if i == 0 or i == len(pts) - 1:
        warnings.warn(
            f"peak at grid boundary g={g[i]:g}; true maximum may lie outside the grid",
            PeakBoundaryWarning,
        )
        return PeakEstimate(g_peak=g[i], e_peak=e[i], method="grid-argmax",
                            n_total=n_total, boundary=True)
    if not refine:
        return PeakEstimate(g_peak=g[i], e_peak=e[i], method="grid-argmax", n_total=n_total)
    coeff = np.polyfit(g[i - 1:i + 2], e[i - 1:i + 2], 2)
    if coeff[0] >= 0:  # degenerate triple (flat or convex); keep the grid point
        return PeakEstimate(g_peak=g[i], e_peak=e[i], method="grid-argmax", n_total=n_total)
    g_star = -coeff[1] / (2 * coeff[0])
    e_star = float(np.polyval(coeff, g_star))
    return PeakEstimate(g_peak=float(g_star), e_peak=e_star, method="parabolic-refined",
                        n_total=n_total)


@dataclass(frozen=True)
class KondoScaleFit:
    """Fit of the pseudo-critical couplings to K_c = prefactor * exp(-alpha/J')."""

    alpha: float
    prefactor: float
    residual: float


def fit_kondo_scale(peaks) -> KondoScaleFit:
    """Least squares of ln K_c against 1/J' over (J', K_c) pairs."""
    pts = [(float(jp), float(kc)) for jp, kc in peaks]
    if len({jp for jp, _ in pts}) < 2:
        raise FitDomainError("need at least 2 distinct J' values")
    if any(kc <= 0 for _, kc in pts):
        raise FitDomainError("all K_c must be positive for the exponential fit")
    x = np.array([1.0 / jp for jp, _ in pts])
    y = np.array([np.log(kc) for _, kc in pts])
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - design @ [slope, intercept]) ** 2)))
    return KondoScaleFit(alpha=float(-slope), prefactor=float(np.exp(intercept)), residual=resid)
