"""Statistics utilities, configs, reports, and the comparison machinery."""
import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sawlab import harness, lattice
from sawlab.sle import PlanarCurve


class TestKS:
    def test_identical_samples_zero_statistic(self):
        xs = np.arange(10.0)
        stat, p = harness.ks_two_sample(xs, xs)
        assert stat == 0.0

    def test_disjoint_supports(self):
        stat, _ = harness.ks_two_sample([1.0, 2.0], [10.0, 11.0])
        assert stat == 1.0

    def test_hand_computed_statistic(self):
        stat, _ = harness.ks_two_sample([1, 2, 3], [1.5, 2.5, 3.5])
        assert stat == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            harness.ks_two_sample([], [1.0])


class TestChiSquare:
    def test_zero_expected_rejected(self):
        with pytest.raises(ValueError):
            harness.chi_square([1.0, 2.0], [0.0, 3.0])

    def test_perfect_fit(self):
        stat, p = harness.chi_square([10.0, 20.0, 30.0], [10.0, 20.0, 30.0])
        assert stat == 0.0
        assert p == 1.0


class TestHausdorff:
    def test_identical_curves(self):
        pts = np.array([0.0, 1.0, 1 + 1j])
        assert harness.curve_hausdorff(pts, pts) == 0.0

    def test_two_points(self):
        assert harness.curve_hausdorff([1 + 1j], [4 + 5j]) == pytest.approx(5.0)

    def test_translated_segment(self):
        seg = np.linspace(0.0, 1.0, 200) + 0j
        assert harness.curve_hausdorff(seg, seg + 0.1j) == pytest.approx(0.1, abs=1e-12)

    @given(
        st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                 min_size=1, max_size=12),
        st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                 min_size=1, max_size=12),
        st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                 min_size=1, max_size=12),
    )
    @settings(max_examples=50, deadline=None)
    def test_metric_properties(self, a, b, c):
        a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
        dab = harness.curve_hausdorff(a, b)
        dba = harness.curve_hausdorff(b, a)
        assert dab == pytest.approx(dba, rel=1e-9, abs=1e-12)
        dac = harness.curve_hausdorff(a, c)
        dcb = harness.curve_hausdorff(c, b)
        assert dab <= dac + dcb + 1e-9


class TestConfig:
    def test_unknown_experiment_named(self):
        cfg = harness.ExperimentConfig("made-up", 1)
        with pytest.raises(harness.ConfigError, match="experiment"):
            cfg.validate()

    def test_bad_seed_named(self):
        cfg = harness.ExperimentConfig("kesten", "one")
        with pytest.raises(harness.ConfigError, match="seed"):
            cfg.validate()

    def test_bad_count_named(self):
        cfg = harness.ExperimentConfig("kesten", 1, {"n_traces": -5})
        with pytest.raises(harness.ConfigError, match="n_traces"):
            cfg.validate()

    def test_registry_size(self):
        assert len(harness.EXPERIMENTS) >= 10

    def test_digest_stable(self):
        a = harness.ExperimentConfig("kesten", 1, {"K": 8})
        b = harness.ExperimentConfig("kesten", 1, {"K": 8})
        assert a.digest() == b.digest()


class TestReports:
    def test_byte_identical_reports(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        for out in (out1, out2):
            harness.run_experiment(
                harness.ExperimentConfig("exact-counts", 7, {"n_max": 7}, out)
            )
        b1 = open(os.path.join(out1, "report.json"), "rb").read()
        b2 = open(os.path.join(out2, "report.json"), "rb").read()
        assert b1 == b2

    def test_report_metadata(self, tmp_path):
        out = str(tmp_path / "r")
        rep = harness.run_experiment(
            harness.ExperimentConfig("exact-counts", 3, {"n_max": 6}, out)
        )
        data = json.load(open(os.path.join(out, "report.json")))
        assert data["config_hash"] == rep.config_hash
        assert data["seed"] == 3
        assert data["version"]
        assert os.path.exists(os.path.join(out, "tables", "counts.csv"))

    def test_estimates_carry_se(self, rng):
        rep = harness.run_experiment(
            harness.ExperimentConfig(
                "chordal-restriction", 5, {"n_traces": 300, "dt": 1e-3}
            )
        )
        for comp in rep.comparisons:
            assert comp["std_error"] >= 0
            assert 0 <= comp["predicted"] <= 1


class TestFunctionals:
    def test_vertical_ray(self):
        pts = 1j * np.linspace(0.0, 2.0, 200)
        f1, f2, f3 = harness.curve_functionals(pts, 1.0)
        assert f1 == pytest.approx(math.pi / 2.0)
        assert f2 == pytest.approx(0.0, abs=1e-12)

    def test_tilted_ray_side_indicator(self):
        pts = np.linspace(0.0, 2.0, 300) * np.exp(1j * math.pi / 4.0)
        f1, f2, f3 = harness.curve_functionals(pts, 1.0)
        assert f1 == pytest.approx(math.pi / 4.0)
        assert f3 == 1.0
        pts_left = np.linspace(0.0, 2.0, 300) * np.exp(3j * math.pi / 4.0)
        assert harness.curve_functionals(pts_left, 1.0)[2] == 0.0

    def test_short_curve_returns_none(self):
        assert harness.curve_functionals(1j * np.linspace(0, 0.5, 50), 1.0) is None

    def test_saw_samples_contract(self, rng):
        vals = harness.saw_functional_samples(40, rng, radius=32.0)
        assert vals.shape == (40, 3)
        assert ((0 < vals[:, 0]) & (vals[:, 0] < math.pi)).all()
        assert (vals[:, 1] >= 0).all()
        assert set(np.unique(vals[:, 2])) <= {0.0, 1.0}

    def test_split_half_null_rejection_rate(self, rng):
        """KS on random halves of one sample: at level 0.01 across 100
        repetitions, at most 5 rejections (binomial bound)."""
        vals = harness.saw_functional_samples(600, rng, radius=32.0)[:, 0]
        rejections = 0
        for _ in range(100):
            perm = rng.permutation(len(vals))
            half = len(vals) // 2
            _, p = harness.ks_two_sample(vals[perm[:half]], vals[perm[half:]])
            rejections += p < 0.01
        assert rejections <= 5


class TestSuites:
    @pytest.mark.slow
    def test_saw_vs_sle_small_scale(self, rng):
        rep = harness.saw_vs_sle_comparison(
            harness.ExperimentConfig(
                "saw-vs-sle",
                17,
                {
                    "n_samples": 900,
                    "n_samples_kappa6": 900,
                    "radius": 64.0,
                    "n_steps": 4096,
                    "n_points": 1024,
                },
            )
        )
        ks = rep.statistics["ks"]
        assert min(r["pvalue"] for r in ks["saw_vs_sle83"].values()) > 0.01
        assert min(r["pvalue"] for r in ks["saw_vs_sle6"].values()) < 1e-3

    @pytest.mark.slow
    def test_eight_vs_five_small_scale(self, rng):
        rep = harness.eight_vs_five(
            harness.ExperimentConfig("eight-vs-five", 9, {"n_groups": 700, "dt": 5e-4})
        )
        assert rep.passed, rep.comparisons
