"""Critical-exponent extraction: power laws, data collapse, closed-form ansatz.

Three routes to the exponents, kept deliberately independent so they can
cross-check each other:

  * ``fit_power_law``   peak height vs size,  E(g_c) ~ N^lambda,
  * ``optimize_collapse`` finite-size collapse, E = N^{beta/nu} f(N^{1/nu}|g-g_c|),
  * ``fit_ansatz``      global form          E = A / (|g-g_c|^beta + B N^-lambda).

The exponents must satisfy beta = nu * lambda; ``exponent_identity_residual``
measures the defect.  ``synth_generate`` produces datasets from the two
closed forms and is the test oracle for all the fitters.

The collapse quality is a master-curve interpolation residual: rescale every
point, then score each point against the piecewise-linear interpolant of the
other sizes' curves over the overlapping range, normalized by the variance
of the rescaled values.  Zero means exact collapse (up to interpolation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, nnls

from .errors import FitDomainError, IllConditionedFitError, OptimizationError

SCALING_SHAPES = {
    "lorentz": lambda x: 1.0 / (1.0 + x ** 2),
    "exp": lambda x: np.exp(-x),
    "gauss": lambda x: np.exp(-(x ** 2)),
}


@dataclass(frozen=True)
class ScalingDataset:
    """Rows of (g, N, E) for one measure, with an optional pinned g_c."""

    measure: str
    g: np.ndarray
    n: np.ndarray
    e: np.ndarray
    g_c: float | None = None
    model: str = "2ikm"
    j_prime: float | None = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        n = np.asarray(self.n, dtype=float)
        e = np.asarray(self.e, dtype=float)
        if not (len(g) == len(n) == len(e)):
            raise ValueError("g, n, e must have equal length")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "e", e)

    @property
    def sizes(self) -> np.ndarray:
        return np.unique(self.n)

    @classmethod
    def from_records(cls, records, measure: str, g_c: float | None = None) -> "ScalingDataset":
        rows = [
            (r.control, r.n_total, getattr(r, measure))
            for r in records
            if r.converged and math.isfinite(getattr(r, measure))
        ]
        if not rows:
            raise FitDomainError(f"no usable rows for measure {measure!r}")
        g, n, e = (np.array(col, dtype=float) for col in zip(*rows))
        model = records[0].model
        jp = records[0].j_prime
        return cls(measure=measure, g=g, n=n, e=e, g_c=g_c, model=model, j_prime=jp)


@dataclass(frozen=True)
class PowerLawFit:
    lam: float
    amplitude: float
    residual: float


def fit_power_law(values) -> PowerLawFit:
    """Least squares of ln E on ln N over (N, E) pairs; E ~ amplitude * N^lam."""
    pts = [(float(n), float(e)) for n, e in values]
    if len({n for n, _ in pts}) < 3:
        raise FitDomainError("need at least 3 distinct sizes for a power-law fit")
    if any(e <= 0 for _, e in pts):
        raise FitDomainError("all E values must be positive for a log-log fit")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - design @ [slope, intercept]) ** 2)))
    return PowerLawFit(lam=float(slope), amplitude=float(np.exp(intercept)), residual=resid)


def _rescaled_curves(dataset: ScalingDataset, nu: float, beta: float, g_c: float):
    """Per-size (x, y) arrays with x = N^{1/nu}|g-g_c|, y = N^{-beta/nu}E."""
    curves = []
    for size in dataset.sizes:
        sel = dataset.n == size
        x = size ** (1.0 / nu) * np.abs(dataset.g[sel] - g_c)
        y = size ** (-beta / nu) * dataset.e[sel]
        order = np.lexsort((y, x))  # lexical tie-break keeps reflections bitwise stable
        curves.append((x[order], y[order]))
    return curves


def collapse_cost(dataset: ScalingDataset, nu: float, beta: float, g_c: float) -> float:
    """Master-curve deviation of the rescaled dataset; 0 means perfect collapse."""
    if len(dataset.sizes) < 2:
        raise FitDomainError("collapse needs at least 2 distinct sizes")
    if not nu > 0:
        raise FitDomainError(f"nu must be positive, got {nu}")
    curves = _rescaled_curves(dataset, nu, beta, g_c)
    sq_sum = 0.0
    count = 0
    for i, (xi, yi) in enumerate(curves):
        for j, (xj, yj) in enumerate(curves):
            if i == j or len(xj) < 2:
                continue
            inside = (xi >= xj[0]) & (xi <= xj[-1])
            if not np.any(inside):
                continue
            yhat = np.interp(xi[inside], xj, yj)
            sq_sum += float(np.sum((yi[inside] - yhat) ** 2))
            count += int(np.count_nonzero(inside))
    if count == 0:
        return float("inf")
    all_y = np.concatenate([y for _, y in curves])
    norm = float(np.var(all_y))
    return (sq_sum / count) / (norm if norm > 0 else 1.0)


@dataclass(frozen=True)
class CollapseFit:
    nu: float
    beta: float
    g_c: float
    quality: float
    trace: list = field(default_factory=list, repr=False, compare=False)


def optimize_collapse(
    dataset: ScalingDataset,
    fit_gc: bool = False,
    restarts: int = 8,
    g_c: float | None = None,
) -> CollapseFit:
    """Simplex search of the collapse cost over (nu, beta) or (nu, beta, g_c).

    Multi-start from a coarse grid over nu in [0.5, 4], beta in [0, 2]; the
    best of all restarts is returned with the full optimizer trace.
    """
    if len(dataset.sizes) < 2:
        raise FitDomainError("collapse needs at least 2 distinct sizes")
    for size in dataset.sizes:
        if np.count_nonzero(dataset.n == size) < 4:
            raise FitDomainError(f"size N={size:g} has fewer than 4 points")
    gc0 = g_c if g_c is not None else dataset.g_c
    if gc0 is None:
        if not fit_gc:
            raise FitDomainError("no g_c: pin one or pass fit_gc=True")
        gc0 = float(np.median(dataset.g))

    def cost_vec(v: np.ndarray) -> float:
        nu, beta = v[0], v[1]
        gc = v[2] if fit_gc else gc0
        if nu <= 0.05 or nu > 20 or abs(beta) > 10:
            return float("inf")
        return collapse_cost(dataset, nu, beta, gc)

    grid = [
        (nu, beta)
        for nu in np.linspace(0.5, 4.0, 8)
        for beta in np.linspace(0.0, 2.0, 9)
    ]
    ranked = sorted(grid, key=lambda nb: cost_vec(np.array([nb[0], nb[1], gc0])))
    starts = [np.array([nu, beta, gc0])[: 3 if fit_gc else 2] for nu, beta in ranked[:restarts]]

    objective = cost_vec if fit_gc else (lambda v: cost_vec(np.append(v, gc0)))
    trace = []
    best = None
    for start in starts:
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-14, "maxiter": 4000, "maxfev": 6000},
        )
        entry = {
            "start": start.tolist(),
            "x": res.x.tolist(),
            "cost": float(res.fun),
            "nfev": int(res.nfev),
        }
        trace.append(entry)
        if math.isfinite(res.fun) and (best is None or res.fun < best[1]):
            best = (res.x, float(res.fun))
    if best is None:
        raise OptimizationError("all collapse restarts diverged", trace=trace)
    # Polish the winner to machine precision; on noise-free data the
    # rescaled curves then coincide to ~1e-12 rather than the coarse xatol.
    polished = minimize(
        objective,
        best[0],
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 4000, "maxfev": 6000},
    )
    if math.isfinite(polished.fun) and polished.fun <= best[1]:
        best = (polished.x, float(polished.fun))
    trace.append({
        "start": "polish", "x": polished.x.tolist(),
        "cost": float(polished.fun), "nfev": int(polished.nfev),
    })
    x, quality = best
    return CollapseFit(
        nu=float(x[0]),
        beta=float(x[1]),
        g_c=float(x[2]) if fit_gc else float(gc0),
        quality=quality,
        trace=trace,
    )


@dataclass(frozen=True)
class AnsatzFit:
    """E = a_coeff / (|g - g_c|^beta + b_coeff * N^-lam)."""

    a_coeff: float
    b_coeff: float
    beta: float
    lam: float
    g_c: float
    residual: float

    def predict(self, g, n):
        return self.a_coeff / (
            np.abs(np.asarray(g, dtype=float) - self.g_c) ** self.beta
            + self.b_coeff * np.asarray(n, dtype=float) ** (-self.lam)
        )


def _ansatz_inner(dataset: ScalingDataset, beta: float, lam: float, gc: float):
    """Nonnegative linear solve for (1/A, B/A) given the exponents."""
    u = np.abs(dataset.g - gc) ** beta
    v = dataset.n ** (-lam)
    target = 1.0 / dataset.e
    design = np.column_stack([u, v])
    coef, rnorm = nnls(design, target)
    rms = rnorm / math.sqrt(len(target))
    return coef, rms


def _powerlaw_lambda_seed(dataset: ScalingDataset, gc: float) -> float | None:
    """lambda estimate from the per-size E at the g closest to g_c."""
    pts = []
    for size in dataset.sizes:
        sel = dataset.n == size
        k = int(np.argmin(np.abs(dataset.g[sel] - gc)))
        pts.append((size, dataset.e[sel][k]))
    try:
        return fit_power_law(pts).lam
    except FitDomainError:
        return None


def fit_ansatz(dataset: ScalingDataset, fit_gc: bool = True, g_c: float | None = None) -> AnsatzFit:
    """Nonlinear least squares of the closed ansatz on 1/E.

    Inner step: nonnegative linear solve for (1/A, B/A) given (beta, lam,
    g_c); outer step: simplex over the exponents (and g_c when ``fit_gc``),
    seeded from a power-law fit at the grid points nearest g_c.
    """
    if np.any(dataset.e <= 0):
        raise FitDomainError("all E values must be positive")
    if len(dataset.sizes) < 2:
        raise FitDomainError("ansatz fit needs at least 2 distinct sizes")
    gc0 = g_c if g_c is not None else dataset.g_c
    if gc0 is None:
        gc0 = float(np.median(dataset.g))
    if fit_gc:
        if np.all(dataset.g >= gc0) or np.all(dataset.g <= gc0):
            raise IllConditionedFitError(
                "g_c is unidentifiable: data lie entirely on one side of it"
            )

    def cost(v: np.ndarray) -> float:
        beta, lam = v[0], v[1]
        gc = v[2] if fit_gc else gc0
        if not (0 < beta <= 5 and 0 < lam <= 5):
            return float("inf")
        try:
            _, rms = _ansatz_inner(dataset, beta, lam, gc)
        except (FloatingPointError, ValueError):
            return float("inf")
        return rms

    lam_seed = _powerlaw_lambda_seed(dataset, gc0)
    lam_seeds = [l for l in (lam_seed, 0.2, 0.5) if l is not None and 0 < l <= 5]
    seeds = [(beta, lam) for beta in (0.3, 0.5, 1.0, 1.5) for lam in lam_seeds]

    trace = []
    best = None
    for beta0, lam0 in seeds:
        start = np.array([beta0, lam0, gc0])[: 3 if fit_gc else 2]
        res = minimize(
            cost,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 6000, "maxfev": 9000},
        )
        trace.append({"start": start.tolist(), "x": res.x.tolist(), "cost": float(res.fun)})
        if math.isfinite(res.fun) and (best is None or res.fun < best[1]):
            best = (res.x, float(res.fun))
    if best is None:
        raise OptimizationError("ansatz fit did not converge from any seed", trace=trace)
    x, rms = best
    beta, lam = float(x[0]), float(x[1])
    gc = float(x[2]) if fit_gc else float(gc0)
    coef, _ = _ansatz_inner(dataset, beta, lam, gc)
    inv_a, b_over_a = float(coef[0]), float(coef[1])
    if inv_a <= 0 or b_over_a <= 0:
        raise OptimizationError(
            f"degenerate ansatz amplitudes (1/A={inv_a:g}, B/A={b_over_a:g})", trace=trace
        )
    return AnsatzFit(
        a_coeff=1.0 / inv_a,
        b_coeff=b_over_a / inv_a,
        beta=beta,
        lam=lam,
        g_c=gc,
        residual=rms,
    )


def exponent_identity_residual(beta: float, nu: float, lam: float) -> float:
    """Defect of the identity beta = nu * lambda."""
    return beta - nu * lam


def synth_generate(
    kind: str,
    params: dict,
    sizes,
    grid,
    noise: float = 0.0,
    seed: int = 0,
    measure: str = "e1",
) -> ScalingDataset:
    """Deterministic dataset from one of the closed forms, the fit oracle.

    kind "ansatz6": params {a, b, beta, lam, g_c}; ``grid`` is a g-grid shared
    by all sizes.

    kind "collapse7": params {nu, beta, g_c, shape, amplitude}; ``grid`` is a
    grid of nonnegative master-curve coordinates x, mapped back to per-size
    control values g = g_c +- x * N^{-1/nu}.  Every size therefore samples
    identical x nodes and exact data collapse to the common interpolant
    exactly.

    Noise is multiplicative Gaussian: E -> E * (1 + noise * xi).
    """
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    rows_g, rows_n, rows_e = [], [], []
    if kind == "ansatz6":
        a, b = float(params["a"]), float(params["b"])
        beta, lam, g_c = float(params["beta"]), float(params["lam"]), float(params["g_c"])
        for n in sizes:
            for g in grid:
                e = a / (abs(g - g_c) ** beta + b * float(n) ** (-lam))
                rows_g.append(float(g))
                rows_n.append(float(n))
                rows_e.append(e)
    elif kind == "collapse7":
        nu, beta, g_c = float(params["nu"]), float(params["beta"]), float(params["g_c"])
        shape = SCALING_SHAPES[params.get("shape", "lorentz")]
        amp = float(params.get("amplitude", 1.0))
        for n in sizes:
            for x in grid:
                if x < 0:
                    raise ValueError("collapse7 grid holds |g-g_c| coordinates, x >= 0")
                e = amp * float(n) ** (beta / nu) * float(shape(float(x)))
                for sign in (1.0, -1.0):
                    if sign < 0 and x == 0:
                        continue
                    rows_g.append(g_c + sign * float(x) * float(n) ** (-1.0 / nu))
                    rows_n.append(float(n))
                    rows_e.append(e)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    e_arr = np.array(rows_e)
    if noise > 0:
        e_arr = e_arr * (1.0 + noise * rng.standard_normal(len(e_arr)))
    g_c_out = float(params["g_c"])
    return ScalingDataset(
        measure=measure, g=np.array(rows_g), n=np.array(rows_n), e=e_arr, g_c=g_c_out
    )


def rescaled_table(dataset: ScalingDataset, nu: float, beta: float, g_c: float) -> str:
    """CSV of the rescaled (N, x, y) points, for collapse plots."""
    lines = ["n_total,x,y"]
    for size in dataset.sizes:
        sel = dataset.n == size
        x = size ** (1.0 / nu) * np.abs(dataset.g[sel] - g_c)
        y = size ** (-beta / nu) * dataset.e[sel]
        for xi, yi in sorted(zip(x.tolist(), y.tolist())):
            lines.append(f"{size:.17g},{xi:.17g},{yi:.17g}")
    return "\n".join(lines) + "\n"


def build_fit_report(
    measure: str,
    model: str,
    mode: str,
    settings: dict,
    nu: float | None = None,
    beta: float | None = None,
    lam: float | None = None,
    g_c: float | None = None,
    quality: float | None = None,
    residuals: dict | None = None,
) -> dict:
    """The fit-report JSON payload shared by all fit modes."""
    identity = None
    if nu is not None and beta is not None and lam is not None:
        identity = exponent_identity_residual(beta, nu, lam)
    return {
        "measure": measure,
        "model": model,
        "mode": mode,
        "nu": nu,
        "beta": beta,
        "lambda": lam,
        "g_c": g_c,
        "quality": quality,
        "residuals": residuals or {},
        "identity_residual": identity,
        "settings": settings,
    }
