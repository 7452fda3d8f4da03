"""Numbered acceptance criteria, one test each, at their stated tolerances.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; either
way the terminal summary ends with one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from fockbeam.asymptotic import (
    BranchTag,
    arcsine_envelope,
    balanced_asymptotic,
    envelope_sign_changes,
)
from fockbeam.exact import FockInput, balanced_amplitude, exact_amplitude, exact_column, exact_probabilities
from fockbeam.integrals import i0_closed, i1_closed, in_approx, in_quadrature, in_recursion
from fockbeam.oracle import oracle_check
from fockbeam.series import Engine, distribution
from fockbeam.statistics import (
    AveragingWindow,
    averaged_distribution_closed,
    averaged_distribution_direct,
    correlation_grid,
    direct_covariance,
    trig_average_identities,
    variance_functional,
)

QUARTER = math.pi / 4


@pytest.mark.criterion(1, "unitarity of the exact engine within 1e-9")
def test_unitarity(ac_record):
    start = time.perf_counter()
    worst = 0.0
    for n_total in (2, 4, 10, 100, 600, 2000):
        for n_a in sorted({0, 1, n_total // 3, n_total // 2, n_total - 1, n_total}):
            dev = abs(math.fsum(exact_probabilities(FockInput(n_total, n_a))) - 1.0)
            worst = max(worst, dev)
    ac_record(f"max |sum |A|^2 - 1| = {worst:.2e} (tol 1e-9), {time.perf_counter() - start:.1f} s")
    assert worst <= 1e-9


@pytest.mark.criterion(2, "two-photon interference zero is an exact zero")
def test_hom_exact_zero(ac_record):
    amp = exact_amplitude(FockInput(2, 1), 1)
    density = distribution(FockInput(2, 1)).points[1].density
    ac_record(f"sign = {amp.sign}, density = {density!r}")
    assert amp.sign == 0
    assert density == 0.0


@pytest.mark.criterion(3, "exact engine equals the matrix-exponential oracle within 1e-8")
def test_oracle_equivalence(ac_record):
    start = time.perf_counter()
    balanced = oracle_check(200, tolerance=1e-8)
    rng = np.random.default_rng(20261018)
    xis = tuple(float(v) for v in rng.uniform(0.0, math.pi, 20))
    n_values = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 200]

    def columns(n_total):
        if n_total <= 34:
            return range(n_total + 1)
        return sorted(set(np.linspace(0, n_total, 16).round().astype(int).tolist()))

    random_xi = oracle_check(200, xis=xis, tolerance=1e-8, n_values=n_values, columns=columns)
    elapsed = time.perf_counter() - start
    ac_record(f"xi = pi/4, all N <= 200, all n_a: max dev {balanced.max_deviation:.2e} "
              f"over {balanced.cases_checked} columns")
    ac_record(f"20 random xi, N in {n_values}: max dev {random_xi.max_deviation:.2e} "
              f"over {random_xi.cases_checked} columns; {elapsed:.1f} s (limit 120 s)")
    assert balanced.passed and random_xi.passed
    assert elapsed < 120


@pytest.mark.criterion(4, "closed balanced form equals the exact sum up to N = 600")
def test_balanced_closed_form(ac_record):
    worst = 0.0
    for n_total in range(2, 601, 2):
        column = exact_column(FockInput(n_total, n_total // 2))
        for m_a, amp in enumerate(column):
            closed = balanced_amplitude(n_total, m_a)
            assert amp.is_zero == closed.is_zero
            if amp.sign:
                assert amp.sign == closed.sign
                worst = max(worst, abs(math.expm1(amp.log_mag - closed.log_mag)))
    ac_record(f"max relative deviation {worst:.2e} (tol 1e-10); zero sets identical for all even N <= 600")
    # which output points vanish at N = 600 and N = 602
    for n_total in (600, 602):
        col = exact_column(FockInput(n_total, n_total // 2))
        zero_nx = [2 * m - n_total for m, a in enumerate(col) if a.is_zero]
        residues = sorted({nx % 4 for nx in zero_nx})
        centre = col[n_total // 2]
        expected = (2 - n_total) % 4
        ac_record(f"N = {n_total}: zeros exactly at Nx = {expected} (mod 4); "
                  f"P(x=0) {'= 0' if centre.is_zero else '> 0'}")
        assert residues == [expected]
    ac_record("so for N = 600 the points Nx = 0, +-4, ... are the non-vanishing ones")
    assert worst <= 1e-10


@pytest.mark.criterion(5, "Stirling form within 1% of the closed form at N = 600, |x| <= 0.9")
def test_stirling_accuracy(ac_record):
    n_total = 600
    amp_err = dens_err = 0.0
    for m_a in range(0, n_total + 1, 2):
        x = (2 * m_a - n_total) / n_total
        if abs(x) > 0.9:
            continue
        exact = balanced_amplitude(n_total, m_a)
        approx = balanced_asymptotic(n_total, m_a)
        assert exact.sign == approx.sign
        amp_err = max(amp_err, abs(math.expm1(approx.log_mag - exact.log_mag)))
        dens_err = max(dens_err, abs(math.expm1(2 * (approx.log_mag - exact.log_mag))))
    ac_record(f"max relative error: amplitude {amp_err:.3%}, density {dens_err:.3%} (tol 1%)")
    assert amp_err <= 0.01
    assert dens_err <= 0.01


@pytest.mark.criterion(6, "N = 600 comparison of the imbalanced form with exact results")
def test_figure2_reproduction(ac_record):
    start = time.perf_counter()
    n_total = 600
    inner_errors = {}
    for ny in (0, 12, 24):
        inp = FockInput.from_imbalance(n_total, ny)
        exact = distribution(inp, Engine.EXACT)
        approx = distribution(inp, Engine.IMBALANCED_EQ17)
        xs = exact.xs()
        interior = np.abs(xs) < 1
        inner = np.abs(xs) <= 0.8
        diff = np.abs(approx.densities() - exact.densities())
        upper = 2 * arcsine_envelope(xs[interior])
        env = np.zeros_like(xs)
        env[interior] = diff[interior] / upper
        env_inner = float(np.max(env[inner]))
        env_outer = float(np.max(env[interior & ~inner]))
        l1 = float(np.sum(diff[inner]) / np.sum(exact.densities()[inner]))
        count_exact = envelope_sign_changes(n_total, [p.amplitude for p in exact.points], BranchTag.INTEGER)
        count_approx = envelope_sign_changes(n_total, [p.amplitude for p in approx.points], BranchTag.INTEGER)
        inner_errors[ny] = env_inner
        ac_record(f"Ny = {ny:2d}: error / upper envelope {env_inner:.2%} on |x| <= 0.8, "
                  f"{env_outer:.2%} beyond; L1 relative {l1:.2%}; envelope sign changes "
                  f"exact {count_exact}, approx {count_approx} (expected {ny // 2})")
        assert env_inner <= 0.05
        assert count_exact == ny // 2 and count_approx == ny // 2
        if ny:
            assert env_outer > env_inner
    elapsed = time.perf_counter() - start
    ac_record(f"{elapsed:.1f} s (limit 60 s)")
    assert elapsed < 60


@pytest.mark.criterion(7, "I_n quadrature, recursion, closed forms and the imbalance correction")
def test_in_engine(ac_record):
    worst_rec = worst_zero = worst_closed = 0.0
    for n_total in range(2, 61, 2):
        n_max = n_total // 4
        grid = [nx / n_total for nx in range(-n_total, n_total + 1, 2)]
        quads = {x: [in_quadrature(n_total, n, x) for n in range(n_max + 1)] for x in grid}
        # members below this floor vanish exactly and only carry rounding residues
        floor = 1e-12 * max(abs(v) for vals in quads.values() for v in vals)
        peak01 = max(abs(v) for vals in quads.values() for v in vals[:2])
        for x, vals in quads.items():
            i0, i1 = i0_closed(n_total, x), i1_closed(n_total, x)
            rec = in_recursion(n_total, x, i0, i1, n_max)
            for q, r in zip(vals, rec):
                if max(abs(q), abs(r)) < floor:
                    worst_zero = max(worst_zero, abs(q - r) / floor)
                else:
                    worst_rec = max(worst_rec, abs(q - r) / abs(q))
            for q, c in zip(vals[:2], (i0, i1)):
                worst_closed = max(worst_closed, abs(q - c) / max(abs(c), peak01))
    ac_record(f"quadrature vs recursion, N <= 60, n <= N/4: max relative {worst_rec:.2e} (tol 1e-8); "
              f"vanishing members agree to {worst_zero:.2e} x 1e-12 of the largest |I_n|")
    ac_record(f"closed I_0, I_1 vs quadrature: max relative {worst_closed:.2e} (tol 1e-10)")
    gains = []
    for n_total in (100, 400):
        n = math.isqrt(n_total)
        q = in_quadrature(n_total, n, 0.0)
        plain = abs(in_approx(n_total, n, 0.0) / q - 1)
        corrected = abs(in_approx(n_total, n, 0.0, corrected=True) / q - 1)
        gains.append(corrected < plain)
        ac_record(f"N = {n_total}, n = {n}, x = 0: relative error {plain:.3f} uncorrected, "
                  f"{corrected:.4f} corrected")
    assert worst_rec <= 1e-8
    assert worst_zero <= 1.0
    assert worst_closed <= 1e-10
    assert all(gains)


@pytest.mark.criterion(8, "branch-averaged density tends to the arcsine law, oscillation ~ 1/(n+1)")
def test_arcsine_universality(ac_record):
    n_total = 10_000
    scaled_amplitudes, bounds_ok = [], True
    for n_bound in (4, 8, 16, 32):
        avg = averaged_distribution_direct(n_total, AveragingWindow(n_bound))
        sel = np.abs(avg.x) <= 0.8
        x = avg.x[sel]
        arc = arcsine_envelope(x)
        direct = avg.density[sel]
        closed = np.array([averaged_distribution_closed(n_total, n_bound, int(m)) for m in avg.m_a[sel]])
        # the two branches straddle the arcsine law; their mean removes the oscillation
        closed_mean = 0.5 * (closed[:-1] + closed[1:])
        direct_mean = 0.5 * (direct[:-1] + direct[1:])
        x_mid = 0.5 * (x[:-1] + x[1:])
        closed_avg_err = float(np.max(np.abs(closed_mean / arcsine_envelope(x_mid) - 1)))
        direct_avg_err = float(np.max(np.abs(direct_mean / arcsine_envelope(x_mid) - 1)))
        closed_vs_direct = float(np.max(np.abs(closed / direct - 1)))
        # oscillatory term of the closed form: P(x) sin((n+1)phi) / ((n+1) sin phi)
        osc = float(np.max(np.abs(direct - arc) * math.pi * (1 - x * x)))
        scaled_amplitudes.append(osc * (n_bound + 1))
        bound = arc / ((n_bound + 1) * np.sqrt(1 - x * x))
        bounds_ok &= bool(np.all(np.abs(closed - arc) <= bound * (1 + 1e-12)))
        ac_record(f"n = {n_bound:2d}: branch mean vs arcsine {direct_avg_err:.2e} (direct), "
                  f"{closed_avg_err:.2e} (closed); closed vs direct {closed_vs_direct:.2e}; "
                  f"(n+1) x oscillation amplitude {osc * (n_bound + 1):.4f}")
        assert direct_avg_err <= 0.03
        assert closed_vs_direct <= 0.03
    slope = np.polyfit(np.log([5, 9, 17, 33]), np.log(np.array(scaled_amplitudes) / [5, 9, 17, 33]), 1)[0]
    ac_record(f"log-log slope of oscillation amplitude vs n+1: {slope:.4f} (expected -1)")
    assert abs(slope + 1) <= 0.05
    assert bounds_ok


@pytest.mark.criterion(9, "closed correlation vs direct ensemble covariance at N = 200, n = 8")
def test_correlation(ac_record):
    n_total, n_bound = 200, 8
    ms = np.arange(n_total + 1)
    xs = (2 * ms - n_total) / n_total
    inner = ms[np.abs(xs) <= 0.8]
    closed = correlation_grid(n_total, n_bound, inner).values
    direct = direct_covariance(n_total, AveragingWindow(n_bound), m_values=inner)
    frob = float(np.linalg.norm(closed - direct) / np.linalg.norm(direct))
    diag = float(np.max(np.abs(np.diag(closed) / np.diag(direct) - 1)))
    f = xs**2
    v_direct = variance_functional(f, n_total, n_bound, x_max=0.8)
    v_closed = variance_functional(f, n_total, n_bound, method="closed", x_max=0.8)
    v_rel = abs(v_closed - v_direct) / v_direct
    const = variance_functional(np.ones(n_total + 1), n_total, n_bound)
    ac_record(f"|x| <= 0.8: Frobenius relative {frob:.2%}, worst diagonal {diag:.2%} (tol 10%)")
    ac_record(f"variance of x^2 on |x| <= 0.8: direct {v_direct:.4e}, closed {v_closed:.4e} ({v_rel:.2%})")
    ac_record(f"constant observable double sum {const:.2e} (tol 1e-9)")
    assert frob <= 0.10
    assert diag <= 0.10
    assert v_rel <= 0.10
    assert abs(const) <= 1e-9


@pytest.mark.criterion(10, "window-average trigonometric identities within 1e-12")
def test_trig_identities(ac_record):
    rng = np.random.default_rng(7)
    phis = rng.uniform(0.0, math.pi, 100)
    worst = 0.0
    for n_bound in range(0, 41, 2):
        k = np.arange(-n_bound // 2, n_bound // 2 + 1)
        for phi in phis:
            sin_avg, cos_avg = trig_average_identities(n_bound, float(phi))
            d_sin = math.fsum(np.sin(k * phi) ** 2) / len(k) / math.sin(phi) ** 2
            d_cos = math.fsum(np.cos(k * phi) ** 2) / len(k)
            worst = max(worst, abs(sin_avg - d_sin) / max(1.0, abs(d_sin)),
                        abs(cos_avg - d_cos) / max(1.0, abs(d_cos)))
    ac_record(f"max deviation {worst:.2e} over n <= 40 and 100 random phi (tol 1e-12)")
    assert worst <= 1e-12


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
