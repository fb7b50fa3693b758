import numpy as np
import pytest

from kondotri.errors import FitDomainError, IllConditionedFitError
from kondotri.scaling import (
    ScalingDataset,
    collapse_cost,
    exponent_identity_residual,
    fit_ansatz,
    fit_power_law,
    optimize_collapse,
    rescaled_table,
    synth_generate,
)

X_GRID = tuple(np.linspace(0.0, 3.0, 21).tolist())
SIZES = (32, 64, 128, 256)


def exact_collapse7(beta=0.38, nu=2.0, g_c=0.3, shape="lorentz", noise=0.0, seed=0):
    return synth_generate(
        "collapse7", dict(nu=nu, beta=beta, g_c=g_c, shape=shape),
        sizes=SIZES, grid=X_GRID, noise=noise, seed=seed,
    )


class TestPowerLaw:
    def test_exact_peak_scaling_exponent(self):
        # lambda = 0.19 is the reported peak-growth exponent for the first measure
        values = [(n, 0.7 * n ** 0.19) for n in (64, 128, 256)]
        fit = fit_power_law(values)
        assert fit.lam == pytest.approx(0.19, abs=1e-12)
        assert fit.amplitude == pytest.approx(0.7, abs=1e-12)
        assert fit.residual <= 1e-12

    def test_constant_data_gives_zero_exponent(self):
        fit = fit_power_law([(16, 2.5), (32, 2.5), (64, 2.5)])
        assert fit.lam == pytest.approx(0.0, abs=1e-14)

    def test_scale_covariance(self):
        values = [(n, 0.7 * n ** 0.19) for n in (64, 128, 256)]
        scaled = [(n, 3.5 * e) for n, e in values]
        base, big = fit_power_law(values), fit_power_law(scaled)
        assert big.lam == pytest.approx(base.lam, abs=1e-12)
        assert big.amplitude == pytest.approx(3.5 * base.amplitude, rel=1e-12)

    def test_recovers_lambda_from_ansatz_generator(self):
        # E(g_c) of the closed form is (A/B) N^lam; lambda = 0.46 is the
        # second measure's reported exponent
        ds = synth_generate(
            "ansatz6", dict(a=0.5, b=2.0, beta=0.92, lam=0.46, g_c=0.3),
            sizes=SIZES, grid=np.linspace(0.25, 0.35, 11), noise=0.0, seed=0,
        )
        pts = []
        for n in SIZES:
            sel = (ds.n == n) & (ds.g == 0.3)
            pts.append((n, float(ds.e[sel][0])))
        fit = fit_power_law(pts)
        assert fit.lam == pytest.approx(0.46, rel=0.02)

    def test_domain_errors(self):
        with pytest.raises(FitDomainError):
            fit_power_law([(16, 1.0), (32, 2.0)])
        with pytest.raises(FitDomainError):
            fit_power_law([(16, 1.0), (32, 2.0), (64, -3.0)])


class TestCollapseCost:
    def test_zero_at_generating_parameters(self):
        ds = exact_collapse7()
        assert collapse_cost(ds, 2.0, 0.38, 0.3) <= 1e-20

    def test_larger_away_from_truth(self):
        ds = exact_collapse7()
        truth = collapse_cost(ds, 2.0, 0.38, 0.3)
        assert collapse_cost(ds, 1.0, 0.38, 0.3) > truth
        assert collapse_cost(ds, 2.0, 0.78, 0.3) > truth
        assert collapse_cost(ds, 2.0, 0.38, 0.5) > truth

    def test_minimum_against_20pct_perturbations(self):
        ds = exact_collapse7()
        truth = collapse_cost(ds, 2.0, 0.38, 0.3)
        for d_nu in (-0.2, 0.0, 0.2):
            for d_beta in (-0.2, 0.0, 0.2):
                for d_gc in (-0.2, 0.0, 0.2):
                    probe = collapse_cost(
                        ds, 2.0 * (1 + d_nu), 0.38 * (1 + d_beta), 0.3 * (1 + d_gc)
                    )
                    assert truth <= probe + 1e-30

    def test_single_size_rejected(self):
        ds = synth_generate("collapse7", dict(nu=2, beta=0.38, g_c=0.3),
                            sizes=(64,), grid=X_GRID)
        with pytest.raises(FitDomainError):
            collapse_cost(ds, 2.0, 0.38, 0.3)

    def test_reflection_invariance(self):
        # symmetric (noise-free) grids: the cost sees only |g - g_c|
        ds = exact_collapse7()
        reflected = ScalingDataset(
            measure=ds.measure, g=2 * 0.3 - ds.g, n=ds.n, e=ds.e, g_c=ds.g_c
        )
        for nu, beta in ((1.7, 0.5), (2.0, 0.38), (2.4, 1.1)):
            a = collapse_cost(ds, nu, beta, 0.3)
            b = collapse_cost(reflected, nu, beta, 0.3)
            assert abs(a - b) <= 1e-12

    def test_disjoint_rescaled_ranges_give_inf(self):
        # two sizes whose rescaled x-ranges cannot overlap under nu=0.1
        ds = ScalingDataset(
            measure="e1",
            g=np.array([0.31, 0.32, 0.33, 0.34, 0.41, 0.42, 0.43, 0.44]),
            n=np.array([4.0, 4.0, 4.0, 4.0, 4096.0, 4096.0, 4096.0, 4096.0]),
            e=np.ones(8),
            g_c=0.3,
        )
        assert collapse_cost(ds, 0.1, 0.0, 0.3) == float("inf")


class TestOptimizeCollapse:
    def test_exact_data_recovers_parameters(self):
        ds = exact_collapse7()
        fit = optimize_collapse(ds, fit_gc=False, restarts=6)
        assert fit.quality <= 1e-12
        assert fit.nu == pytest.approx(2.0, abs=1e-3)
        assert fit.beta == pytest.approx(0.38, abs=1e-3)

    @pytest.mark.parametrize("beta_true", [0.38, 1.0])
    def test_noisy_recovery_quick(self, beta_true):
        errs = []
        for seed in range(3):
            ds = exact_collapse7(beta=beta_true, noise=0.01, seed=seed)
            fit = optimize_collapse(ds, fit_gc=False, restarts=4)
            errs.append((abs(fit.nu - 2.0), abs(fit.beta - beta_true)))
        nu_err = float(np.median([e[0] for e in errs]))
        beta_err = float(np.median([e[1] for e in errs]))
        assert nu_err <= 0.1
        assert beta_err <= 0.04

    def test_fit_gc_mode(self):
        ds = exact_collapse7()
        no_gc = ScalingDataset(measure=ds.measure, g=ds.g, n=ds.n, e=ds.e, g_c=None)
        fit = optimize_collapse(no_gc, fit_gc=True, restarts=6)
        assert fit.g_c == pytest.approx(0.3, abs=5e-3)
        assert fit.quality <= 1e-10

    def test_too_few_points_rejected(self):
        ds = synth_generate("collapse7", dict(nu=2, beta=0.38, g_c=0.3),
                            sizes=(32, 64), grid=(0.0, 1.0))
        with pytest.raises(FitDomainError):
            optimize_collapse(ds)

    def test_trace_recorded(self):
        fit = optimize_collapse(exact_collapse7(), fit_gc=False, restarts=3)
        assert len(fit.trace) == 4  # 3 restarts plus the final polish
        assert all("cost" in t for t in fit.trace)
        assert fit.trace[-1]["start"] == "polish"


class TestAnsatzFit:
    def test_exact_recovery_within_one_percent(self):
        ds = synth_generate(
            "ansatz6", dict(a=0.5, b=2.0, beta=0.38, lam=0.19, g_c=0.3),
            sizes=SIZES, grid=np.linspace(0.05, 0.55, 26), noise=0.0, seed=0,
        )
        fit = fit_ansatz(ds)
        assert fit.a_coeff == pytest.approx(0.5, rel=0.01)
        assert fit.b_coeff == pytest.approx(2.0, rel=0.01)
        assert fit.beta == pytest.approx(0.38, rel=0.01)
        assert fit.lam == pytest.approx(0.19, rel=0.01)
        assert fit.g_c == pytest.approx(0.3, abs=0.003)

    def test_prediction_at_gc_is_power_law(self):
        ds = synth_generate(
            "ansatz6", dict(a=0.5, b=2.0, beta=0.38, lam=0.19, g_c=0.3),
            sizes=SIZES, grid=np.linspace(0.1, 0.5, 17), noise=0.0, seed=0,
        )
        fit = fit_ansatz(ds)
        for n in (64, 4096):
            assert fit.predict(fit.g_c, n) == pytest.approx(
                (fit.a_coeff / fit.b_coeff) * n ** fit.lam, rel=1e-9
            )

    def test_one_sided_data_flagged_ill_conditioned(self):
        ds = synth_generate(
            "ansatz6", dict(a=0.5, b=2.0, beta=0.38, lam=0.19, g_c=0.3),
            sizes=SIZES, grid=np.linspace(0.31, 0.55, 13), noise=0.0, seed=0,
        )
        with pytest.raises(IllConditionedFitError):
            fit_ansatz(ds, fit_gc=True)

    def test_nonpositive_values_rejected(self):
        ds = ScalingDataset(measure="e1", g=np.array([0.1, 0.2]),
                            n=np.array([8.0, 8.0]), e=np.array([1.0, -1.0]), g_c=0.3)
        with pytest.raises(FitDomainError):
            fit_ansatz(ds)


class TestIdentity:
    @pytest.mark.parametrize(
        "beta, nu, lam",
        [(0.38, 2.0, 0.19), (1.0, 2.0, 0.5), (0.92, 2.0, 0.46)],
    )
    def test_reported_exponent_triples_close(self, beta, nu, lam):
        assert exponent_identity_residual(beta, nu, lam) == 0.0

    def test_identity_closure_on_synthetic_fits(self):
        # generate with beta = nu * lam, then recover beta/nu from collapse and
        # lam from the peak power law; the identity must close within 0.02
        nu, lam = 2.0, 0.19
        beta = nu * lam
        ds = exact_collapse7(beta=beta, nu=nu, noise=0.005, seed=9)
        cfit = optimize_collapse(ds, fit_gc=False, restarts=4)
        pts = []
        for n in ds.sizes:
            sel = (ds.n == n) & (np.abs(ds.g - 0.3) < 1e-12)
            pts.append((n, float(ds.e[sel][0])))
        pfit = fit_power_law(pts)
        resid = exponent_identity_residual(cfit.beta, cfit.nu, pfit.lam)
        assert abs(resid) <= 0.02


class TestSynthGenerate:
    def test_ansatz6_rows_satisfy_closed_form(self):
        params = dict(a=0.5, b=2.0, beta=0.38, lam=0.19, g_c=0.3)
        ds = synth_generate("ansatz6", params, sizes=(32, 64), grid=(0.1, 0.3, 0.5))
        for g, n, e in zip(ds.g, ds.n, ds.e):
            expected = 0.5 / (abs(g - 0.3) ** 0.38 + 2.0 * n ** -0.19)
            assert e == pytest.approx(expected, rel=1e-15)

    def test_fixed_seed_reproducible(self):
        a = exact_collapse7(noise=0.02, seed=7)
        b = exact_collapse7(noise=0.02, seed=7)
        assert np.array_equal(a.e, b.e)
        c = exact_collapse7(noise=0.02, seed=8)
        assert not np.array_equal(a.e, c.e)

    def test_collapse7_exponential_rescaled_rows_coincide(self):
        ds = exact_collapse7(shape="exp")
        by_x = {}
        for g, n, e in zip(ds.g, ds.n, ds.e):
            x = round(float(n ** 0.5 * abs(g - 0.3)), 9)
            by_x.setdefault(x, []).append(e * float(n) ** (-0.19))
        for x, ys in by_x.items():
            assert np.ptp(ys) <= 1e-12

    def test_invalid_kind(self):
        with pytest.raises(ValueError):
            synth_generate("eq9", {}, sizes=(8,), grid=(0.1,))

    def test_rescaled_table_format(self):
        ds = exact_collapse7()
        table = rescaled_table(ds, 2.0, 0.38, 0.3)
        lines = table.strip().splitlines()
        assert lines[0] == "n_total,x,y"
        assert len(lines) == 1 + len(ds.g)
