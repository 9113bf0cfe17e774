import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rtdspeedup.fit import Exponential, Lognormal, ShiftedExponential, model_cdf, model_pdf
from rtdspeedup.orderstats import (SpeedupCurve, SpeedupLimit, empirical_expected_min,
                                   expected_min, min_cdf, min_pdf, predicted_speedup,
                                   speedup_curve, speedup_limit)
from rtdspeedup.rtd import Rtd

from oracles import exact_bootstrap_min

MODELS = [ShiftedExponential(0, 1), ShiftedExponential(100, 1 / 700),
          ShiftedExponential(0.01, 10), Exponential(1 / 793.9),
          Lognormal(0, 1), Lognormal(6, 0.8), Lognormal(-2, 2.0)]


def mc_min(m, n, trials, seed, chunk=1 << 22):
    """Brute-force minima of n independent draws."""
    rng = np.random.default_rng(seed)
    out = []
    rows = max(1, chunk // n)
    done = 0
    while done < trials:
        c = min(rows, trials - done)
        out.append(m.sample(rng, (c, n)).min(axis=1))
        done += c
    return np.concatenate(out)


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_min_cdf_single_walk_is_base(m):
    xs = np.linspace(0, 3 * m.mean(), 101)
    assert np.array_equal(min_cdf(m, 1, xs), model_cdf(m, xs))


def test_min_cdf_from_half():
    m = Lognormal(1.5, 0.3)
    assert min_cdf(m, 2, math.exp(1.5)) == pytest.approx(0.75, abs=1e-15)


def test_min_cdf_against_monte_carlo():
    z = mc_min(Lognormal(0, 1), 16, 10**6, seed=17)
    p = np.mean(z <= 0.5)
    se = math.sqrt(p * (1 - p) / z.size)
    assert abs(min_cdf(Lognormal(0, 1), 16, 0.5) - p) < 3 * se


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(MODELS), st.integers(1, 1000), st.floats(0, 5))
def test_min_cdf_stochastic_dominance(m, n, scale):
    x = scale * m.mean()
    assert min_cdf(m, n + 1, x) >= min_cdf(m, n, x) - 1e-15


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_min_pdf_single_walk_is_base(m):
    xs = np.linspace(0.01, 3 * m.mean(), 50)
    assert min_pdf(m, 1, xs) == pytest.approx(model_pdf(m, xs), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 48, 384])
def test_min_pdf_shifted_closed_form(n):
    x0, lam = 100.0, 1 / 700
    t = np.linspace(100.5, 3000, 40)
    expected = n * lam * np.exp(-n * lam * (t - x0))
    assert min_pdf(ShiftedExponential(x0, lam), n, t) == pytest.approx(expected, rel=1e-12)


def _z_quantile(m, n, q):
    # Z quantile through the base ppf: F^-1(1 - (1 - q)^(1/n))
    return float(m.ppf(-math.expm1(math.log1p(-q) / n)))


@pytest.mark.parametrize("m", [ShiftedExponential(100, 1 / 700), Lognormal(0, 1),
                               Lognormal(6, 0.8)], ids=repr)
@pytest.mark.parametrize("n", [1, 48, 384])
def test_min_pdf_integrates_to_one(m, n):
    qs = [0.01, 0.1, 0.5, 0.9, 0.99, 1 - 1e-12]
    pts = [m.support_min] + [_z_quantile(m, n, q) for q in qs]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(lambda t: min_pdf(m, n, t), a, b, epsabs=1e-14,
                                epsrel=1e-12, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


def test_expected_min_shifted_example():
    m = ShiftedExponential(100, 1 / 700)
    assert expected_min(m, 48) == pytest.approx(100 + 700 / 48, rel=1e-14)
    assert expected_min(m, 48) == pytest.approx(114.583, abs=1e-3)
    z = mc_min(m, 48, 10**6, seed=5)
    assert abs(z.mean() - expected_min(m, 48)) / expected_min(m, 48) < 0.002


@pytest.mark.parametrize("m", [ShiftedExponential(0, 1), ShiftedExponential(100, 1 / 700),
                               ShiftedExponential(0.01, 10), Exponential(3.0)], ids=repr)
@pytest.mark.parametrize("n", [1, 2, 48, 384, 10**5])
def test_generic_quadrature_matches_closed_form(m, n):
    closed = m.x0 + 1 / (n * m.lam)
    assert expected_min(m, n, method="quadrature") == pytest.approx(closed, rel=1e-7)


@pytest.mark.parametrize("m", [Lognormal(0, 1), Lognormal(6, 0.8), Lognormal(1, 2.5)], ids=repr)
@pytest.mark.parametrize("n", [1, 2, 7, 64, 384, 5000])
def test_lognormal_u_space_matches_t_space(m, n):
    a = expected_min(m, n)
    b = expected_min(m, n, method="quadrature")
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("n", [2, 8, 16])
def test_lognormal_expected_min_against_brute_force_mc(n):
    m = Lognormal(0, 1)
    z = mc_min(m, n, 10**6, seed=100 + n)
    se = z.std(ddof=1) / math.sqrt(z.size)
    assert abs(z.mean() - expected_min(m, n)) < 3 * se


def test_lognormal_n1_is_mean():
    m = Lognormal(2, 0.5)
    assert expected_min(m, 1) == m.mean()
    assert expected_min(m, 1, method="quadrature") == pytest.approx(m.mean(), rel=1e-8)


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_expected_min_nonincreasing(m):
    ez = [expected_min(m, 2 ** k) for k in range(10)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(ez, ez[1:]))


def test_huge_core_count_does_not_underflow():
    m = Lognormal(6, 0.8)
    a, b = expected_min(m, 10**5), expected_min(m, 10**6)
    assert 0 < b < a < m.mean()
    assert math.isfinite(predicted_speedup(m, 10**6))


def test_bad_core_counts():
    for n in (0, -3, 2.5):
        with pytest.raises(ValueError):
            expected_min(Exponential(1.0), n)
    with pytest.raises(ValueError):
        expected_min(Exponential(1.0), 2, method="simpson")


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_speedup_one_core(m):
    assert predicted_speedup(m, 1) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [48, 96, 192, 384])
def test_exponential_speedup_is_linear(n):
    assert predicted_speedup(Exponential(0.37), n) == pytest.approx(float(n), rel=1e-12)
    assert predicted_speedup(ShiftedExponential(0, 0.37), n) == pytest.approx(float(n), rel=1e-12)


def test_shifted_speedup_example():
    assert predicted_speedup(ShiftedExponential(100, 1 / 700), 48) == pytest.approx(800 / (100 + 700 / 48))
    assert predicted_speedup(ShiftedExponential(100, 1 / 700), 48) == pytest.approx(6.982, abs=1e-3)


def test_limits():
    assert speedup_limit(ShiftedExponential(0, 5)).value == math.inf
    assert speedup_limit(Exponential(5)).value == math.inf
    lim = speedup_limit(ShiftedExponential(100, 1 / 700))
    assert lim.value == pytest.approx(8.0, rel=1e-15) and lim.kind == "closed-form"
    limits = [speedup_limit(ShiftedExponential(x0, 0.01)).value for x0 in (100, 10, 1, 0.1)]
    assert limits == sorted(limits) and limits[0] < limits[-1]


@pytest.mark.parametrize("x0,lam", [(100, 1 / 700), (0.01, 10), (3, 2)])
def test_shifted_speedup_converges_to_limit(x0, lam):
    m = ShiftedExponential(x0, lam)
    lim = speedup_limit(m).value
    g = [predicted_speedup(m, 2 ** k) for k in range(12)]
    assert all(b > a for a, b in zip(g, g[1:]))
    assert all(v <= lim for v in g)
    assert abs(predicted_speedup(m, 10**6) - lim) / lim < 1e-4


def test_lognormal_speedup_saturates():
    m = Lognormal(0, 1)
    g = {n: predicted_speedup(m, n) for n in (2, 4, 256, 512)}
    assert g[512] / g[256] < g[4] / g[2]
    curve = [predicted_speedup(m, 2 ** k) for k in range(12)]
    assert all(b > a for a, b in zip(curve, curve[1:]))


def test_lognormal_limit_is_reported_numerically():
    lim = speedup_limit(Lognormal(0, 1))
    assert lim.kind == "numerical"
    assert lim.probe_n == 2 ** 20
    assert lim.probe_speedup == pytest.approx(predicted_speedup(Lognormal(0, 1), 2 ** 20))
    # increments of G in log2(n) keep growing for a lognormal, so no finite asymptote is claimed
    assert not lim.finite
    assert SpeedupLimit.from_dict(json.loads(json.dumps(lim.to_dict()))) == lim


def test_empirical_min_single_core_is_mean():
    rtd = Rtd(np.random.default_rng(1).lognormal(4, 1, 300))
    est = empirical_expected_min(rtd, 1, 200_000, seed=3)
    se = rtd.samples.std() / math.sqrt(200_000)
    assert abs(est - rtd.samples.mean()) < 4 * se


def test_empirical_min_large_n_approaches_min():
    rtd = Rtd(np.random.default_rng(1).lognormal(4, 1, 50))
    est = empirical_expected_min(rtd, 1000, 2000, seed=3)
    assert est == pytest.approx(rtd.samples[0], rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 5, 40])
def test_empirical_min_matches_exact_bootstrap_expectation(n):
    rtd = Rtd(np.random.default_rng(2).exponential(100, 80))
    exact = exact_bootstrap_min(list(rtd.samples), n)
    est = empirical_expected_min(rtd, n, 400_000, seed=9, chunk_elems=1 << 20)
    # spread of a single bootstrap minimum, from an independent pilot draw
    pilot = rtd.samples[np.random.default_rng(0).integers(0, rtd.n, (20_000, n)).min(axis=1)]
    se = pilot.std() / math.sqrt(400_000)
    assert abs(est - exact) < 4 * se + 1e-12


def test_empirical_min_shifted_oracle():
    x = ShiftedExponential(50, 0.02).sample(np.random.default_rng(1), 5000)
    est = empirical_expected_min(Rtd(x), 16, 200_000, seed=4)
    target = 50 + 1 / (16 * 0.02)
    assert abs(est - target) / target < 0.02


def test_empirical_min_deterministic():
    rtd = Rtd(np.random.default_rng(1).lognormal(4, 1, 50))
    assert empirical_expected_min(rtd, 8, 999, 5) == empirical_expected_min(rtd, 8, 999, 5)


def test_curve_exponential():
    c = speedup_curve(Exponential(0.01), [48, 96, 192, 384])
    assert [p.speedup for p in c.points] == pytest.approx([48, 96, 192, 384], rel=1e-12)
    assert c.limit.value == math.inf


def test_curve_shifted():
    c = speedup_curve(ShiftedExponential(100, 1 / 700), [1, 48])
    (n1, e1, g1), (n2, e2, g2) = [(p.n, p.expected_runtime, p.speedup) for p in c.points]
    assert (n1, n2) == (1, 48)
    assert e1 == pytest.approx(800) and g1 == 1.0
    assert e2 == pytest.approx(114.583, abs=1e-3) and g2 == pytest.approx(6.982, abs=1e-3)
    assert c.limit.value == pytest.approx(8.0)
    assert c.base_mean == pytest.approx(800)


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_curve_invariants(m):
    c = speedup_curve(m, [1, 2, 3, 8, 48, 384, 1000])
    g = [p.speedup for p in c.points]
    assert g[0] == pytest.approx(1.0, abs=1e-9)
    assert all(b >= a for a, b in zip(g, g[1:]))
    if c.limit.finite:
        assert all(v <= c.limit.value * (1 + 1e-12) for v in g)
    assert speedup_curve(m, [1]).points[0].speedup == pytest.approx(1.0, abs=1e-9)


def test_curve_serialization():
    c = speedup_curve(ShiftedExponential(100, 1 / 700), [1, 2, 48])
    lines = c.to_csv().splitlines()
    assert lines[0] == "n,expected_runtime,speedup"
    assert len(lines) == 4
    back = SpeedupCurve.from_dict(json.loads(c.to_json()))
    assert back == c
    assert set(c.header()) == {"model", "limit", "base_mean"}
    with pytest.raises(ValueError):
        speedup_curve(Exponential(1), [])
