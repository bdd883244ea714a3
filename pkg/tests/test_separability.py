"""Tolerance, minimum removals, condition numbers, and their oracles."""

import numpy as np
import pytest

from tverberg_lab import kernels, separability as sep
from tverberg_lab.errors import GuardRefused
from tverberg_lab.geometry import ColoredPartition, PointSet
from oracles import brute_min_removals, brute_threshold_misclass

_TOL = 1e-9 / 8.0


def _kernel_separable(Xa, Xb):
    """Strict separability as hull disjointness, via the feasibility kernel."""
    pts = np.ascontiguousarray(np.vstack([Xa, Xb]))
    scale = max(np.abs(pts).max(), 1.0)
    offsets = np.array([0, len(Xa), len(pts)], dtype=np.int64)
    status, _, _ = kernels.hulls_common_feasibility(pts / scale, offsets, _TOL, 5000)
    assert status != -1
    return status == 0


def random_two_label(rng, n, d, kind="gauss"):
    if kind == "cube":
        X = rng.uniform(-1, 1, size=(n, d))
    elif kind == "split":
        X = rng.normal(size=(n, d))
        X[: n // 2] += 1.5
    else:
        X = rng.normal(size=(n, d))
    y = rng.integers(1, 3, size=n)
    y[0], y[1] = 1, 2  # both labels present
    return sep.LabeledDataset(d, X, y)


class TestToleranceExact:
    def test_interval_instance(self):
        p = ColoredPartition.from_class_rows([[[-2], [-1], [1], [2]],
                                              [[-3], [0], [3]]])
        res = sep.tolerance_exact(p, t_max=3)
        assert res.tolerance == 1 and not res.at_cap
        assert len(res.breaking_set) == 2
        # removing the breaking set must empty the intersection
        points, offsets = p.as_arrays()
        keep = np.ones(p.total, dtype=bool)
        keep[list(res.breaking_set)] = False
        assert not sep._survives(points, offsets, keep)
        assert all(4 <= i < 7 for i in res.breaking_set)  # within the 3-point class

    def test_single_point_class(self):
        p = ColoredPartition.from_class_rows([[[-1], [1]], [[0]]])
        res = sep.tolerance_exact(p, t_max=2)
        assert res.tolerance == 0 and res.break_count == 1

    def test_already_disjoint(self):
        p = ColoredPartition.from_class_rows([[[0], [1]], [[2], [3]]])
        res = sep.tolerance_exact(p, t_max=2)
        assert res.tolerance == -1 and res.breaking_set == ()

    def test_planar_one_tolerant_instance(self):
        # three pentagons inscribed in the unit circle, rotated; every single
        # removal keeps all three hulls meeting at the center region
        ang = np.pi / 2 + 2 * np.pi * np.arange(5) / 5
        classes = [np.c_[np.cos(ang + off), np.sin(ang + off)]
                   for off in (0.0, 0.42, 0.84)]
        p = ColoredPartition.from_class_rows(classes)
        res = sep.tolerance_exact(p, t_max=1)
        assert res.tolerance >= 1

    def test_guard_refuses_large(self):
        rng = np.random.default_rng(0)
        p = ColoredPartition.from_class_rows([rng.normal(size=(15, 2)),
                                              rng.normal(size=(15, 2))])
        with pytest.raises(GuardRefused):
            sep.tolerance_exact(p, t_max=5)

    def test_at_cap_flag(self):
        p = ColoredPartition.from_class_rows(
            [np.linspace(-1, 1, 8)[:, None], np.linspace(-1, 1, 8)[:, None]])
        res = sep.tolerance_exact(p, t_max=0)
        assert res.at_cap and res.tolerance == 0 and res.breaking_set is None


class TestMinRemovals:
    def test_separable_zero(self):
        ds = sep.LabeledDataset.from_label_values(
            [[0.0], [1.0], [5.0], [6.0]], ["a", "a", "b", "b"])
        assert sep.min_removals_to_separable(ds) == (0, ())

    def test_middle_point(self):
        ds = sep.LabeledDataset.from_label_values([[1], [3], [2]], "aab")
        cnt, removed = sep.min_removals_to_separable(ds)
        assert cnt == 1 and removed in ((1,), (2,))

    def test_interleaved(self):
        ds = sep.LabeledDataset.from_label_values(
            [[x] for x in (1, 3, 5, 7, 2, 4, 6, 8)], "aaaabbbb")
        cnt, removed = sep.min_removals_to_separable(ds)
        assert cnt == 3
        keep = np.ones(8, dtype=bool)
        keep[list(removed)] = False
        assert _kernel_separable(ds.X[keep & (ds.y == 1)], ds.X[keep & (ds.y == 2)])

    def test_removal_set_certifies(self):
        rng = np.random.default_rng(50)
        for _ in range(120):
            d = int(rng.integers(1, 4))
            ds = random_two_label(rng, int(rng.integers(4, 13)), d)
            cnt, removed = sep.min_removals_to_separable(ds)
            assert cnt == len(removed)
            keep = np.ones(ds.n, dtype=bool)
            keep[list(removed)] = False
            Xa, Xb = ds.X[keep & (ds.y == 1)], ds.X[keep & (ds.y == 2)]
            assert len(Xa) == 0 or len(Xb) == 0 or _kernel_separable(Xa, Xb)

    def test_matches_subset_brute_force(self):
        rng = np.random.default_rng(51)
        for trial in range(300):
            d = int(rng.integers(1, 4))
            n = int(rng.integers(4, 13))
            kind = ("gauss", "cube", "split")[trial % 3]
            ds = random_two_label(rng, n, d, kind)
            cnt, _ = sep.min_removals_to_separable(ds)
            assert cnt == brute_min_removals(ds.X, ds.y, _kernel_separable), \
                (trial, d, n, kind)

    def test_d1_count_matches_kernel(self):
        rng = np.random.default_rng(52)
        for _ in range(60):
            n = int(rng.integers(2, 40))
            x = rng.integers(0, 8, size=n).astype(float)
            y = rng.integers(1, 3, size=n)
            y[0], y[1] = 1, 2
            ds = sep.LabeledDataset(1, x[:, None], y)
            s = np.where(y == 1, 1.0, -1.0)
            assert sep.min_removals_to_separable(ds)[0] == \
                kernels.min_misclass_1d(x, s) == brute_threshold_misclass(x, s)

    def test_dim_guard(self):
        rng = np.random.default_rng(1)
        ds = random_two_label(rng, 10, 5)
        with pytest.raises(GuardRefused):
            sep.min_removals_to_separable(ds)

    def test_needs_two_labels(self):
        ds = sep.LabeledDataset.from_label_values([[0.0], [1.0]], "aa")
        with pytest.raises(ValueError):
            sep.min_removals_to_separable(ds)


class TestPertsep0:
    def test_interleaved_value(self):
        ds = sep.LabeledDataset.from_label_values(
            [[x] for x in (1, 3, 5, 7, 2, 4, 6, 8)], "aaaabbbb")
        rep = sep.pertsep0(ds)
        assert rep.pertsep0 == 3 / 8
        assert rep.tolerance == 2  # printed identity is off by one; see ledger

    def test_separable_zero(self):
        ds = sep.LabeledDataset.from_label_values(
            [[0.0, 0.0], [4.0, 4.0]], "ab")
        rep = sep.pertsep0(ds)
        assert rep.pertsep0 == 0.0 and rep.tolerance == -1

    def test_identity_and_bound_on_random_instances(self):
        rng = np.random.default_rng(60)
        for _ in range(60):
            d = int(rng.integers(1, 4))
            ds = random_two_label(rng, int(rng.integers(4, 13)), d)
            rep = sep.pertsep0(ds)
            assert rep.min_removals == rep.tolerance + 1
            assert rep.pertsep0 <= 0.5
            assert rep.min_removals <= ds.n // 2


class TestDegnsep:
    def test_d1_three_points(self):
        ds = sep.LabeledDataset(1, np.array([[1.0], [2.0], [3.0]]),
                                np.array([1, 2, 1]))
        assert sep.degnsep_exact_low_dim(ds) == pytest.approx(2 / 3, abs=1e-15)

    def test_separable_through_origin_zero(self):
        ds = sep.LabeledDataset(2, np.array([[1.0, 0.2], [2.0, -0.1],
                                             [-1.0, 0.3], [-0.5, -0.2]]),
                                np.array([1, 1, 2, 2]))
        assert sep.degnsep_exact_low_dim(ds) == pytest.approx(0.0, abs=1e-12)

    def test_line_through_origin_zero(self):
        ds = sep.LabeledDataset(2, np.array([[1.0, 1.0], [2.0, 2.0],
                                             [-3.0, -3.0]]),
                                np.array([1, 2, 1]))
        assert sep.degnsep_exact_low_dim(ds) == pytest.approx(0.0, abs=1e-12)

    def test_zero_iff_weakly_separable(self):
        rng = np.random.default_rng(61)
        zeros = 0
        for _ in range(150):
            d = int(rng.integers(1, 3))
            ds = random_two_label(rng, int(rng.integers(3, 12)), d,
                                  kind=("gauss", "split")[int(rng.integers(2))])
            val = sep.degnsep_exact_low_dim(ds)
            weak = sep.weakly_separable_through_origin(ds)
            assert (val <= 1e-10) == weak, (val, weak)
            zeros += val <= 1e-10
        assert 0 < zeros < 150  # both outcomes exercised

    def test_sampled_upper_bounds_exact(self):
        rng = np.random.default_rng(62)
        for _ in range(40):
            ds = random_two_label(rng, int(rng.integers(5, 25)), 2)
            exact = sep.degnsep_exact_low_dim(ds)
            sampled = sep.degnsep_sampled(ds, 10000, seed=int(rng.integers(1 << 30)))
            assert sampled >= exact - 1e-12
            assert sampled - exact <= 1e-3

    def test_high_dim_rejected(self):
        ds = sep.LabeledDataset(3, np.zeros((2, 3)), np.array([1, 2]))
        with pytest.raises(Exception):
            sep.degnsep_exact_low_dim(ds)

    def test_sampled_separable_hits_zero(self):
        ds = sep.LabeledDataset(2, np.array([[1.0, 0.0], [2.0, 0.5],
                                             [-1.0, 0.0], [-2.0, -0.5]]),
                                np.array([1, 1, 2, 2]))
        assert sep.degnsep_sampled(ds, 4000, seed=3) <= 1e-6


class TestCertificate:
    def _grouped_squares_class(self, rng, d=2, groups=2):
        """Consecutive blocks of 2d points, each block surrounding the origin."""
        blocks = []
        for _ in range(groups):
            th = rng.uniform(0, 2 * np.pi)
            ang = th + np.pi / 2 * np.arange(4)
            r = rng.uniform(0.8, 1.6)
            blocks.append(np.c_[r * np.cos(ang), r * np.sin(ang)])
        return np.vstack(blocks)

    def test_grouped_squares_certificate(self):
        rng = np.random.default_rng(70)
        classes = [self._grouped_squares_class(rng, groups=2) for _ in range(3)]
        p = ColoredPartition.from_class_rows(classes)
        cert = sep.tolerance_certificate_grouped(p, (0.0, 0.0))
        assert cert == 1  # two containing groups per class

    def test_candidate_outside_all(self):
        rng = np.random.default_rng(71)
        classes = [rng.normal(size=(6, 2)) for _ in range(2)]
        p = ColoredPartition.from_class_rows(classes)
        assert sep.tolerance_certificate_grouped(p, (40.0, 40.0)) is None

    def test_certificate_sound_vs_exhaustive(self):
        rng = np.random.default_rng(72)
        checked = 0
        for _ in range(100):
            d = int(rng.integers(1, 3))
            m = int(rng.integers(1, 3))
            classes = [rng.normal(size=(int(rng.integers(4 * d, 6 * d + 1)), d))
                       for _ in range(m)]
            p = ColoredPartition.from_class_rows(classes)
            cert = sep.tolerance_certificate_grouped(p, np.zeros(d))
            if cert is None:
                continue
            res = sep.tolerance_exact(p, t_max=max(cert, 0), override=True)
            assert res.tolerance >= cert  # at_cap means tolerance == t_max == cert
            checked += 1
        assert checked >= 20

    def test_radon_mode_sound(self):
        rng = np.random.default_rng(73)
        checked = 0
        for _ in range(60):
            d = 1
            n = int(rng.integers(8, 17))
            pts = rng.normal(size=(n, d))
            half = n // 2
            p = ColoredPartition.from_class_rows([pts[:half], pts[half:]])
            cert = sep.tolerance_certificate_grouped(p, np.zeros(d), mode="radon")
            if cert is None:
                continue
            res = sep.tolerance_exact(p, t_max=max(cert, 0), override=True)
            assert res.tolerance >= cert
            checked += 1
        assert checked >= 10


class TestCsvRoundTrip:
    def test_write_read_identical(self, tmp_path):
        rng = np.random.default_rng(80)
        ds = random_two_label(rng, 9, 3)
        path = tmp_path / "ds.csv"
        sep.write_dataset_csv(ds, path)
        back = sep.read_dataset_csv(path)
        assert back.dim == ds.dim
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.y, ds.y)
        assert back.label_names == ds.label_names

    def test_malformed_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,label\n0.5,a\noops\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 3"):
            sep.read_dataset_csv(path)

    def test_header_required(self, tmp_path):
        path = tmp_path / "nohdr.csv"
        path.write_text("0.5,a\n", encoding="utf-8")
        with pytest.raises(ValueError, match="header"):
            sep.read_dataset_csv(path)
