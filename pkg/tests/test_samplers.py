"""Second-order samplers, the first-order baseline, and the augmentation driver."""

from __future__ import annotations

import numpy as np
import pytest

from cems import (
    AugmentedSamples,
    Dataset,
    GeometryError,
    NeighborIndex,
    ParameterError,
    SamplerConfig,
    augment_dataset,
    draw_noise,
    foma_sample,
    gen_sine,
    knn_neighbors,
    resolve_intrinsic_dim,
    sample_batch,
    sample_point,
    sine_distance,
)


def sine_dataset(n=400, seed=0) -> Dataset:
    return gen_sine(n, noise_sd=0.0, seed=seed)


def planar_dataset(n=60, seed=0) -> Dataset:
    """Joint points exactly on a 2-plane embedded in 4-dimensional joint space."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((n, 2))
    axes = np.array(
        [[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]]
    )  # feature part of the two plane axes
    features = coeffs @ axes
    targets = coeffs @ np.array([0.5, 2.0])  # target is linear too -> flat joint
    return Dataset(features=features, targets=targets)


def plane_residual(points: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Oracle: distance of each point to the affine hull of ``reference``."""
    mu = reference.mean(axis=0)
    deltas = reference - mu
    _, s, Vt = np.linalg.svd(deltas, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-9))
    basis = Vt[:rank].T
    rel = points - mu
    return np.linalg.norm(rel - rel @ basis @ basis.T, axis=-1)


class TestConfigValidation:
    def test_defaults_are_valid(self):
        SamplerConfig().validate()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sigma": -0.1},
            {"k": 1},
            {"mode": "global"},
            {"selection": "nearest"},
            {"order": 3},
            {"order": 0},
            {"ridge": -1.0},
            {"ridge": "huge"},
            {"intrinsic_dim": 0},
            {"intrinsic_dim": "guess"},
        ],
    )
    def test_invalid_settings_rejected(self, kwargs):
        with pytest.raises(ParameterError):
            SamplerConfig(**kwargs).validate()

    def test_intrinsic_dim_must_leave_room_for_a_normal_direction(self):
        with pytest.raises(ParameterError):
            SamplerConfig(intrinsic_dim=4).validate(ambient_dim=4)
        SamplerConfig(intrinsic_dim=3).validate(ambient_dim=4)

    def test_sigma_zero_is_allowed(self):
        SamplerConfig(sigma=0.0).validate()


class TestDrawNoise:
    def test_zero_sigma_returns_mean_exactly(self):
        rng = np.random.default_rng(0)
        np.testing.assert_array_equal(draw_noise(rng, 0.0, 3), np.zeros(3))
        mean = np.array([1.0, -2.0])
        np.testing.assert_array_equal(draw_noise(rng, 0.0, 2, mean=mean), mean)

    def test_statistics_match_isotropic_gaussian(self):
        rng = np.random.default_rng(1)
        draws = np.array([draw_noise(rng, 0.5, 4) for _ in range(4000)])
        assert np.abs(draws.mean(axis=0)).max() < 0.05
        np.testing.assert_allclose(draws.std(axis=0), 0.5, atol=0.05)


class TestPointSampler:
    def test_zero_noise_returns_anchor_bit_for_bit(self):
        data = sine_dataset()
        index = NeighborIndex(data.joint())
        config = SamplerConfig(sigma=0.0, intrinsic_dim=1, k=12, mode="point")
        z, record = sample_point(index, 37, config, np.random.default_rng(0))
        assert np.array_equal(z, data.row(37))
        assert record.anchor_index == 37
        assert record.mode == "point"
        np.testing.assert_array_equal(record.eta, np.zeros(1))

    def test_samples_stay_near_the_generating_curve(self):
        data = sine_dataset()
        index = NeighborIndex(data.joint())
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=16, mode="point", ridge=0.0)
        rng = np.random.default_rng(2)
        samples = np.array(
            [sample_point(index, int(a), config, rng)[0] for a in range(0, 400, 13)]
        )
        assert sine_distance(samples).max() < 1e-2

    def test_flat_data_gives_flat_charts_and_in_plane_samples(self):
        data = planar_dataset()
        index = NeighborIndex(data.joint())
        config = SamplerConfig(sigma=0.3, intrinsic_dim=2, k=10, mode="point", ridge=0.0)
        rng = np.random.default_rng(3)
        for anchor in (0, 11, 29):
            z, record = sample_point(index, anchor, config, rng)
            assert plane_residual(z, data.joint()) < 1e-9
            assert record.residual < 1e-9


class TestBatchSampler:
    def test_zero_noise_reconstructs_all_members(self):
        data = sine_dataset()
        index = NeighborIndex(data.joint())
        k = 8
        config = SamplerConfig(sigma=0.0, intrinsic_dim=1, k=k, mode="batch", ridge=0.0)
        out = sample_batch(index, 50, config, np.random.default_rng(0))
        nb = knn_neighbors(index, 50, k, include_anchor=True)
        assert out.samples.shape == (k, data.ambient_dim)
        np.testing.assert_allclose(out.samples, nb.members, atol=1e-9)

    def test_batch_includes_anchor_and_returns_k_samples(self):
        data = sine_dataset()
        index = NeighborIndex(data.joint())
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=6, mode="batch", ridge=0.0)
        out = sample_batch(index, 100, config, np.random.default_rng(1))
        assert out.samples.shape == (6, 2)
        assert len(out.provenance) == 6
        assert all(rec.mode == "batch" for rec in out.provenance)
        assert sine_distance(out.samples).max() < 1e-2

    def test_first_order_batch_also_reconstructs_at_zero_noise(self):
        data = sine_dataset()
        index = NeighborIndex(data.joint())
        config = SamplerConfig(sigma=0.0, intrinsic_dim=1, k=8, mode="batch", order=1, ridge=0.0)
        out = sample_batch(index, 200, config, np.random.default_rng(2))
        nb = knn_neighbors(index, 200, 8, include_anchor=True)
        np.testing.assert_allclose(out.samples, nb.members, atol=1e-9)


class TestFoma:
    @staticmethod
    def tilted_plane_members(seed=0, n=12, offset_scale=0.05):
        rng = np.random.default_rng(seed)
        basis = np.linalg.qr(rng.standard_normal((3, 2)))[0]
        coords = rng.standard_normal((n, 2))
        offsets = offset_scale * rng.standard_normal(n)
        normal = np.cross(basis[:, 0], basis[:, 1])
        return coords @ basis.T + np.outer(offsets, normal) + 5.0

    def make_neighborhood(self, members):
        from cems import Neighborhood

        return Neighborhood(
            anchor_index=0,
            anchor=members[0],
            member_indices=np.arange(len(members)),
            members=members,
            strategy="knn",
            include_anchor=True,
        )

    def test_lambda_one_reproduces_members_exactly(self):
        members = self.tilted_plane_members()
        nb = self.make_neighborhood(members)
        config = SamplerConfig(intrinsic_dim=2, k=len(members), mode="batch")
        out = foma_sample(nb, 1.0, config)
        np.testing.assert_allclose(out.samples, members, atol=1e-10)

    def test_lambda_scales_off_plane_residual_and_keeps_tangent_part(self):
        members = self.tilted_plane_members(seed=1)
        nb = self.make_neighborhood(members)
        config = SamplerConfig(intrinsic_dim=2, k=len(members), mode="batch")
        lam = 0.25
        out = foma_sample(nb, lam, config)

        # independent plane oracle from an eigen-decomposition of the covariance
        mu = members.mean(axis=0)
        cov = (members - mu).T @ (members - mu)
        _, vecs = np.linalg.eigh(cov)
        n_hat = vecs[:, 0]  # smallest-variance direction
        resid_in = (members - mu) @ n_hat
        resid_out = (out.samples - mu) @ n_hat
        np.testing.assert_allclose(resid_out, lam * resid_in, atol=1e-10)

        in_plane = lambda Z: (Z - mu) - np.outer((Z - mu) @ n_hat, n_hat)
        np.testing.assert_allclose(in_plane(out.samples), in_plane(members), atol=1e-10)

    def test_lambda_bounds_rejected(self):
        members = self.tilted_plane_members()
        nb = self.make_neighborhood(members)
        config = SamplerConfig(intrinsic_dim=2, k=len(members), mode="batch")
        for lam in (0.0, -0.5, 1.5):
            with pytest.raises(ParameterError):
                foma_sample(nb, lam, config)


class TestAugmentDataset:
    def test_point_mode_produces_exactly_n_gen_rows(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=12, mode="point")
        out = augment_dataset(data, config, 7, np.random.default_rng(0))
        assert out.samples.shape == (7, 2)
        assert len(out.provenance) == 7
        assert all(0 <= rec.anchor_index < data.n for rec in out.provenance)

    def test_batch_mode_truncates_to_n_gen(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=5, mode="batch")
        out = augment_dataset(data, config, 7, np.random.default_rng(0))
        assert out.samples.shape == (7, 2)
        assert len(out.provenance) == 7

    def test_auto_intrinsic_dimension_resolved_from_data(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.05, intrinsic_dim="auto", k=12, mode="point")
        out = augment_dataset(data, config, 5, np.random.default_rng(1))
        assert out.stats["intrinsic_dim"] == 1

    def test_resolve_intrinsic_dim_keeps_explicit_value(self):
        config = SamplerConfig(intrinsic_dim=1)
        resolved = resolve_intrinsic_dim(config, sine_dataset().joint())
        assert resolved.intrinsic_dim == 1
        auto = resolve_intrinsic_dim(SamplerConfig(intrinsic_dim="auto"), sine_dataset().joint())
        assert auto.intrinsic_dim == 1

    def test_stats_reported(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=12, mode="point")
        out = augment_dataset(data, config, 4, np.random.default_rng(2), method="cems")
        assert out.stats["method"] == "cems"
        assert out.stats["failures"] == 0
        assert out.stats["attempts"] >= 4

    def test_same_seed_is_bit_identical_and_seeds_differ(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.1, intrinsic_dim=1, k=12, mode="batch")
        a = augment_dataset(data, config, 20, np.random.default_rng(42))
        b = augment_dataset(data, config, 20, np.random.default_rng(42))
        c = augment_dataset(data, config, 20, np.random.default_rng(43))
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_worker_count_does_not_change_results(self):
        data = sine_dataset()
        config = SamplerConfig(sigma=0.1, intrinsic_dim=1, k=8, mode="batch")
        serial = augment_dataset(data, config, 24, np.random.default_rng(7), workers=1)
        threaded = augment_dataset(data, config, 24, np.random.default_rng(7), workers=4)
        assert np.array_equal(serial.samples, threaded.samples)
        assert [r.anchor_index for r in serial.provenance] == [
            r.anchor_index for r in threaded.provenance
        ]

    def test_foma_method_runs_through_driver(self):
        data = sine_dataset()
        config = SamplerConfig(intrinsic_dim=1, k=8, mode="batch")
        out = augment_dataset(
            data, config, 10, np.random.default_rng(3), method="foma", foma_lambda=0.5
        )
        assert out.samples.shape == (10, 2)
        assert out.stats["method"] == "foma"
        assert sine_distance(out.samples).max() < 0.05

    def test_selection_strategies_run(self):
        data = sine_dataset()
        for selection, mode in (("knnp", "point"), ("random", "batch")):
            config = SamplerConfig(
                sigma=0.05, intrinsic_dim=1, k=8, mode=mode, selection=selection
            )
            out = augment_dataset(data, config, 6, np.random.default_rng(4))
            assert out.samples.shape == (6, 2)

    def test_degenerate_dataset_exceeds_failure_budget(self):
        row = np.array([1.0, 2.0, 3.0])
        data = Dataset(features=np.tile(row, (20, 1)), targets=np.ones((20, 1)))
        config = SamplerConfig(sigma=0.1, intrinsic_dim=1, k=4, mode="point")
        with pytest.raises(GeometryError, match="budget"):
            augment_dataset(data, config, 10, np.random.default_rng(0))

    @pytest.mark.parametrize(
        "kwargs,exc",
        [
            ({"n_gen": 0}, ParameterError),
            ({"method": "mixup"}, ParameterError),
            ({"workers": 0}, ParameterError),
        ],
    )
    def test_driver_argument_validation(self, kwargs, exc):
        data = sine_dataset()
        config = SamplerConfig(intrinsic_dim=1)
        call = {"n_gen": 5, "method": "cems", "workers": 1}
        call.update(kwargs)
        with pytest.raises(exc):
            augment_dataset(
                data,
                config,
                call["n_gen"],
                np.random.default_rng(0),
                method=call["method"],
                workers=call["workers"],
            )

    def test_oversized_k_fails_fast_as_a_parameter_error(self):
        data = Dataset(features=np.arange(10.0).reshape(-1, 1), targets=np.ones((10, 1)))
        config = SamplerConfig(sigma=0.05, intrinsic_dim=1, k=16, mode="point")
        with pytest.raises(ParameterError):
            augment_dataset(data, config, 3, np.random.default_rng(0))

    def test_augmented_samples_container_defaults(self):
        out = AugmentedSamples(samples=np.zeros((2, 3)))
        assert out.provenance == []
        assert out.stats == {}
        assert out.n == 2
