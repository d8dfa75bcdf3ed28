"""Loewner discretization: exactness checks, invariants, avoidance engines."""
import math

import numpy as np
import pytest
from scipy import stats

from sawlab import sle
from sawlab.conformal import RadialRestrictionMap, SlitMap


def kappa0_driving(T, N):
    return sle.DrivingPath(0.0, np.linspace(0.0, T, N + 1), np.zeros(N + 1))


class TestChordal:
    def test_kappa0_exact_for_any_step_count(self):
        for N in (1, 7, 100):
            cur = sle.trace_from_driving(kappa0_driving(1.0, N), n_points=N)
            err = np.max(np.abs(cur.points[1:] - 2j * np.sqrt(cur.times[1:])))
            assert err <= 1e-9

    def test_capacity_coefficient_is_2T(self, rng):
        for kappa, T in ((8.0 / 3.0, 1.0), (6.0, 2.5)):
            driving = sle.DrivingPath.sample(kappa, T, 2000, rng)
            coef = sle.capacity_coefficient(driving)
            assert coef == pytest.approx(2.0 * T, rel=1e-6)

    def test_half_plane_confinement(self, rng):
        for _ in range(5):
            cur = sle.chordal_trace(8.0 / 3.0, 1.0, 2048, rng, n_points=512)
            assert cur.points.imag.min() >= -1e-9

    def test_determinism(self):
        r1 = np.random.default_rng(99)
        r2 = np.random.default_rng(99)
        c1 = sle.chordal_trace(8.0 / 3.0, 1.0, 1024, r1, n_points=128)
        c2 = sle.chordal_trace(8.0 / 3.0, 1.0, 1024, r2, n_points=128)
        assert np.array_equal(c1.points, c2.points)

    def test_driving_path_validation(self):
        with pytest.raises(ValueError):
            sle.DrivingPath(1.0, np.array([0.0, 0.0, 1.0]), np.zeros(3))

    def test_approximate_simplicity_diagnostic(self, rng):
        """Sample points far apart in capacity never coincide exactly."""
        cur = sle.chordal_trace(8.0 / 3.0, 1.0, 8192, rng, n_points=1024)
        pts, times = cur.points, cur.times
        sep = np.abs(pts[:, None] - pts[None, :])
        far = np.abs(times[:, None] - times[None, :]) > 0.1
        assert sep[far].min() > 0

    def test_arclength_sampling_covers_curve(self, rng):
        cur = sle.chordal_trace(8.0 / 3.0, 1.0, 8192, rng, n_points=2048, arclength=True)
        gaps = np.abs(np.diff(cur.points))
        # balanced sampling: the largest gap stays within a few times the median
        assert gaps.max() < 20 * np.median(gaps)

    @pytest.mark.slow
    def test_brownian_scaling_of_endpoint(self, rng):
        """|gamma(T)| at horizon r^2 T matches r * |gamma(T)| in distribution."""
        n = 1500
        a = np.empty(n)
        b = np.empty(n)
        for i in range(n):
            a[i] = abs(sle.chordal_trace(8 / 3, 1.0, 512, rng, n_points=2).points[-1])
            b[i] = abs(sle.chordal_trace(8 / 3, 4.0, 2048, rng, n_points=2).points[-1])
        assert stats.ks_2samp(2.0 * a, b).pvalue > 0.01


class TestRadial:
    def test_initial_condition(self, rng):
        cur = sle.radial_trace(8.0 / 3.0, 1.0, 256, rng, n_points=32, w0=0.7)
        assert cur.points[0] == pytest.approx(np.exp(0.7j), abs=1e-12)

    def test_kappa0_matches_closed_form(self):
        # with constant driving the trace solves q(gamma) = e^{-t} q(1)
        N = 400
        dt = 2.0 / N
        idx = np.arange(1, N + 1)
        pts = sle._radial_trace_kernel(np.zeros(N + 1), dt, idx, False)
        t = dt * idx
        m = np.exp(-t) / 4.0
        exact = 2 * m / ((1 - 2 * m) + np.sqrt(1 - 4 * m))
        assert np.max(np.abs(pts - exact)) < 1e-12
        assert np.all(np.diff(np.abs(pts)) < 0)
        assert np.all(np.abs(pts.imag) < 1e-14)

    def test_derivative_normalization_e_t(self, rng):
        """Composed forward map has g'(0) = e^t (checked at t = 0.5, 1)."""
        for T in (0.5, 1.0):
            N = 2000
            driving = sle.DrivingPath.sample(8.0 / 3.0, T, N, rng)
            dt = T / N
            eps = 1e-6
            z = np.array([eps, -eps], dtype=complex)
            for j in range(N):
                rot = np.exp(1j * driving.values[j])
                v = z / rot
                m = np.exp(dt) * v / (1.0 + v) ** 2
                z = rot * (2 * m / ((1 - 2 * m) + np.sqrt(1 - 4 * m)))
            deriv = abs(z[0] - z[1]) / (2 * eps)
            assert deriv == pytest.approx(math.exp(T), rel=1e-4)

    def test_stays_in_disk(self, rng):
        for _ in range(5):
            cur = sle.radial_trace(8.0 / 3.0, 2.0, 2048, rng, n_points=256)
            assert np.abs(cur.points).max() <= 1.0 + 1e-9


class TestFullPlane:
    def test_start_magnitude_bound(self, rng):
        for _ in range(10):
            cur = sle.full_plane_trace(8.0 / 3.0, (-5.0, 0.0), 512, rng, n_points=16)
            assert abs(cur.points[0]) <= math.exp(-5.0 + 1.0)

    def test_requires_deep_start(self, rng):
        with pytest.raises(ValueError):
            sle.full_plane_trace(8.0 / 3.0, (-1.0, 0.0), 128, rng)

    @pytest.mark.slow
    def test_rotational_symmetry(self, rng):
        angles = []
        for _ in range(800):
            cur = sle.full_plane_trace(8.0 / 3.0, (-5.0, 0.0), 400, rng, n_points=2)
            angles.append(np.angle(cur.points[-1]) % (2 * np.pi))
        u = stats.kstest(np.asarray(angles) / (2 * np.pi), "uniform")
        assert u.pvalue > 0.01

    @pytest.mark.slow
    def test_start_depth_stability(self, rng):
        a = np.array([
            abs(sle.full_plane_trace(8 / 3, (-5.0, 0.0), 500, rng, n_points=2).points[-1])
            for _ in range(700)
        ])
        b = np.array([
            abs(sle.full_plane_trace(8 / 3, (-7.0, 0.0), 700, rng, n_points=2).points[-1])
            for _ in range(700)
        ])
        assert stats.ks_2samp(a, b).pvalue > 0.01


class TestAvoidance:
    def test_empty_obstacle_probability_one(self, rng):
        traces = [sle.chordal_trace(8 / 3, 0.5, 256, rng, n_points=64) for _ in range(5)]
        est = sle.avoidance_probability(traces, [])
        assert est.value == 1.0

    def test_flow_engine_matches_closed_form(self, rng):
        slit = SlitMap.vertical_slit(-1.0, 1.0)
        est = sle.chordal_slit_avoidance(slit, 2500, rng, dt=2.5e-4)
        target = slit.derivative_at_zero() ** 0.625
        assert est.agrees_with(target, slack=0.02)

    def test_tube_estimator_brackets_flow_value(self, rng):
        """Stored-trace tube test: crossing-raw above, tube-corrected below."""
        slit = SlitMap.vertical_slit(-1.0, 1.0)
        traces = [
            sle.chordal_trace(8 / 3, 12.0, 4096, rng, n_points=1500)
            for _ in range(250)
        ]
        est = sle.avoidance_probability(traces, slit)
        target = slit.derivative_at_zero() ** 0.625
        se = est.std_error
        assert est.details["raw"] >= target - 3 * se - 0.02
        assert est.value <= target + 3 * se + 0.02

    def test_kappa6_below_restriction_prediction(self, rng):
        slit = SlitMap.vertical_slit(-1.0, 1.0)
        est = sle.chordal_slit_avoidance(slit, 600, rng, kappa=6.0, dt=1e-3)
        target = slit.derivative_at_zero() ** 0.625
        assert est.value < target - 5 * est.std_error

    def test_radial_flow_matches_closed_form(self, rng):
        rmap = RadialRestrictionMap(math.pi, 0.3)
        est = sle.radial_obstacle_avoidance(rmap, 2000, rng, dt=2.5e-4)
        assert est.agrees_with(rmap.predicted_probability(), slack=0.02)

    @pytest.mark.slow
    def test_radial_monotone_in_delta(self, rng):
        vals = []
        for delta in (0.15, 0.3, 0.45):
            rmap = RadialRestrictionMap(math.pi, delta)
            vals.append(sle.radial_obstacle_avoidance(rmap, 1500, rng, dt=5e-4).value)
        assert vals[0] > vals[1] > vals[2]

    def test_step_stability(self, rng):
        """Halving dt moves the corrected estimate by less than the band."""
        slit = SlitMap.vertical_slit(-1.0, 1.0)
        e1 = sle.chordal_slit_avoidance(slit, 1500, rng, dt=5e-4)
        e2 = sle.chordal_slit_avoidance(slit, 1500, rng, dt=2.5e-4)
        assert abs(e1.value - e2.value) < 3 * math.hypot(e1.std_error, e2.std_error) + 0.025
