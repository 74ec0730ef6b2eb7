import numpy as np
import pytest

from pawprune import objective as obj
from pawprune.data import PatternSequence
from pawprune.errors import ConfigurationError, ContractError
from pawprune.frae import FraeConfig, init_model


class TestFitnessSpec:
    def test_defaults(self):
        spec = obj.FitnessSpec()
        assert spec.kind == obj.ENVELOPE_CORRELATION
        assert spec.window_frames == 30

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            obj.FitnessSpec(kind="psnr")
        with pytest.raises(ConfigurationError):
            obj.FitnessSpec(window_frames=0)


class TestNegMse:
    def test_perfect_reconstruction(self):
        frames = np.random.default_rng(0).uniform(size=(10, 22))
        assert obj.neg_mse_fitness(frames, frames) == 0.0

    def test_known_value(self):
        a = np.zeros((2, 3))
        b = np.full((2, 3), 0.5)
        assert obj.neg_mse_fitness(a, b) == pytest.approx(-0.25)

    def test_higher_is_better(self):
        frames = np.random.default_rng(1).uniform(size=(10, 22))
        near = frames + 0.01
        far = frames + 0.3
        assert obj.neg_mse_fitness(frames, near) > obj.neg_mse_fitness(frames, far)

    def test_shape_mismatch(self):
        with pytest.raises(ContractError):
            obj.neg_mse_fitness(np.zeros((4, 22)), np.zeros((5, 22)))


class TestEnvelopeCorrelation:
    def setup_method(self):
        self.spec = obj.FitnessSpec(window_frames=10)

    def test_perfect_reconstruction_scores_one(self):
        frames = np.random.default_rng(2).uniform(size=(40, 22))
        got = obj.envelope_correlation_fitness(frames, frames, self.spec)
        assert got == pytest.approx(1.0)

    def test_scaled_copy_scores_one(self):
        # correlation is amplitude-invariant
        frames = np.random.default_rng(3).uniform(size=(40, 22))
        got = obj.envelope_correlation_fitness(frames, 0.5 * frames, self.spec)
        assert got == pytest.approx(1.0)

    def test_anticorrelated_clipped_to_floor(self):
        t = np.arange(40, dtype=np.float64)
        frames = np.tile(np.sin(0.5 * t)[:, None], (1, 22)) * 0.4 + 0.5
        got = obj.envelope_correlation_fitness(frames, 1.0 - frames, self.spec)
        assert got == 0.0

    def test_zero_variance_reference_windows_skipped(self):
        frames = np.zeros((40, 22))
        hat = np.random.default_rng(4).uniform(size=(40, 22))
        got = obj.envelope_correlation_fitness(frames, hat, self.spec)
        assert got == 0.0  # no scoreable windows

    def test_zero_variance_reconstruction_counts_as_zero(self):
        frames = np.random.default_rng(5).uniform(size=(40, 22))
        got = obj.envelope_correlation_fitness(frames, np.zeros((40, 22)),
                                               self.spec)
        assert got == 0.0

    def test_too_short_sequence(self):
        with pytest.raises(ContractError):
            obj.envelope_correlation_fitness(np.zeros((5, 22)),
                                             np.zeros((5, 22)), self.spec)

    def test_range(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            a = rng.uniform(size=(35, 22))
            b = rng.uniform(size=(35, 22))
            got = obj.envelope_correlation_fitness(a, b, self.spec)
            assert 0.0 <= got <= 1.0

    def test_score_floor(self):
        spec = obj.FitnessSpec(window_frames=10, score_floor=-1.0)
        t = np.arange(40, dtype=np.float64)
        frames = np.tile(np.sin(0.5 * t)[:, None], (1, 22)) * 0.4 + 0.5
        got = obj.envelope_correlation_fitness(frames, 1.0 - frames, spec)
        assert got == pytest.approx(-1.0, abs=1e-9)


class TestDatasetFitness:
    def setup_method(self):
        config = FraeConfig(input_dim=22, latent_dim=2, encoder_hidden=4,
                            decoder_hidden=4, codebook_size=8)
        self.model = init_model(config, seed=1)
        rng = np.random.default_rng(7)
        self.dataset = [PatternSequence(frames=rng.uniform(size=(35, 22)))
                        for _ in range(3)]

    def test_mean_over_sequences(self):
        spec = obj.FitnessSpec(kind=obj.NEG_MSE)
        per_seq = [obj.dataset_fitness(self.model, [s], spec)
                   for s in self.dataset]
        total = obj.dataset_fitness(self.model, self.dataset, spec)
        assert total == pytest.approx(np.mean(per_seq), abs=1e-12)

    def test_empty_dataset(self):
        with pytest.raises(ContractError):
            obj.dataset_fitness(self.model, [], obj.FitnessSpec())

    def test_deterministic(self):
        spec = obj.FitnessSpec(window_frames=10)
        a = obj.dataset_fitness(self.model, self.dataset, spec)
        b = obj.dataset_fitness(self.model, self.dataset, spec)
        assert a == b

    def test_dispatch_by_kind(self):
        mse = obj.dataset_fitness(self.model, self.dataset,
                                  obj.FitnessSpec(kind=obj.NEG_MSE))
        env = obj.dataset_fitness(self.model, self.dataset,
                                  obj.FitnessSpec(window_frames=10))
        assert mse <= 0.0
        assert 0.0 <= env <= 1.0
