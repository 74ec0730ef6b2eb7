import numpy as np
import pytest

from pawprune import paloss
from pawprune import params as ps
from pawprune.errors import ConfigurationError, ContractError


def partition():
    return ps.build_partition([(ps.ENCODER_WEIGHT, 2), (ps.DECODER_WEIGHT, 2)])


def schedule(**kw):
    defaults = dict(g_kind="linear", n_max=1000, rate=0.5,
                    scope=ps.WHOLE_MODEL, lam=1.0)
    defaults.update(kw)
    return paloss.PerturbationSchedule(**defaults)


class TestAttack:
    def test_endpoints(self):
        for kind in paloss.G_KINDS:
            assert paloss.attack(kind, 0.0) == 0.0
            assert paloss.attack(kind, 1.0) == 1.0

    def test_values_at_quarter(self):
        assert paloss.attack("linear", 0.25) == 0.25
        assert paloss.attack("square", 0.25) == 0.0625
        assert paloss.attack("cube", 0.25) == pytest.approx(0.015625)
        assert paloss.attack("sqrt", 0.25) == 0.5

    def test_ordering_on_open_interval(self):
        # cube < square < linear < sqrt strictly for 0 < x < 1
        for x in (0.1, 0.5, 0.9):
            vals = [paloss.attack(k, x)
                    for k in ("cube", "square", "linear", "sqrt")]
            assert vals == sorted(vals)
            assert len(set(vals)) == 4

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            paloss.attack("quartic", 0.5)


class TestSchedule:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            schedule(g_kind="nope")
        with pytest.raises(ConfigurationError):
            schedule(n_max=0)
        with pytest.raises(ConfigurationError):
            schedule(rate=1.5)
        with pytest.raises(ConfigurationError):
            schedule(scope="everything")
        with pytest.raises(ConfigurationError):
            schedule(lam=-0.1)

    def test_scale_boundaries(self):
        sched = schedule(g_kind="square", n_max=200)
        assert paloss.perturbation_scale(sched, 0) == 0.0
        assert paloss.perturbation_scale(sched, 200) == 1.0
        assert paloss.perturbation_scale(sched, 100) == 0.25

    def test_scale_out_of_range(self):
        with pytest.raises(ContractError):
            paloss.perturbation_scale(schedule(), 1001)
        with pytest.raises(ContractError):
            paloss.perturbation_scale(schedule(), -1)


class TestPerturbedWeights:
    def test_start_is_identity(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        out = paloss.perturbed_weights(w, partition(), schedule(), 0)
        np.testing.assert_array_equal(out, w)

    def test_end_is_masked_bit_exact(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        sched = schedule()
        out = paloss.perturbed_weights(w, partition(), sched, sched.n_max)
        mask = ps.select_pruned_indices(w, partition(), 0.5, ps.WHOLE_MODEL)
        np.testing.assert_array_equal(out, ps.apply_mask(w, mask))
        np.testing.assert_array_equal(out, [0.5, 0.0, 0.0, -0.7])

    def test_halfway_linear(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        out = paloss.perturbed_weights(w, partition(), schedule(), 500)
        np.testing.assert_allclose(out, [0.5, -0.05, 0.15, -0.7], atol=1e-15)

    def test_mask_tracks_current_weights(self):
        sched = schedule()
        part = partition()
        # smallest two entries differ between the two vectors
        a = paloss.perturbed_weights(np.array([0.9, 0.1, 0.2, 0.8]),
                                     part, sched, sched.n_max)
        b = paloss.perturbed_weights(np.array([0.1, 0.9, 0.8, 0.2]),
                                     part, sched, sched.n_max)
        np.testing.assert_array_equal(a, [0.9, 0.0, 0.0, 0.8])
        np.testing.assert_array_equal(b, [0.0, 0.9, 0.8, 0.0])

    def test_scope_respected(self):
        w = np.array([0.01, 0.02, 0.5, -0.7])
        sched = schedule(scope=ps.DECODER_ONLY)
        out = paloss.perturbed_weights(w, partition(), sched, sched.n_max)
        # encoder weights survive even though they are the smallest
        np.testing.assert_array_equal(out, [0.01, 0.02, 0.0, -0.7])


class TestPaFitness:
    def test_penalty_formula(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        sched = schedule(lam=2.0)
        base = lambda v: float(np.sum(v))
        got = paloss.pa_fitness(base, w, partition(), sched, sched.n_max)
        f_w = np.sum(w)
        f_p = 0.5 - 0.7
        assert got == pytest.approx(f_w - 2.0 * abs(f_w - f_p), abs=1e-15)

    def test_no_penalty_when_pruning_is_free(self):
        # base fitness only reads the surviving coordinates
        w = np.array([0.5, -0.001, 0.002, -0.7])
        base = lambda v: float(v[0] + v[3])
        sched = schedule()
        got = paloss.pa_fitness(base, w, partition(), sched, sched.n_max)
        assert got == pytest.approx(base(w), abs=1e-15)

    def test_penalty_is_absolute_value(self):
        # an improvement under pruning is penalized just like a degradation
        w = np.array([1.0, -0.1, 5.0, 2.0])
        base = lambda v: float(np.sum(v))
        sched = schedule(rate=0.25)
        f_w = base(w)
        f_p = base(np.array([1.0, 0.0, 5.0, 2.0]))
        assert f_p > f_w
        got = paloss.pa_fitness(base, w, partition(), sched, sched.n_max)
        assert got == pytest.approx(f_w - abs(f_w - f_p), abs=1e-15)

    def test_iteration_zero_equals_base(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        base = lambda v: float(np.sum(v ** 2))
        assert paloss.pa_fitness(base, w, partition(), schedule(), 0) == \
            pytest.approx(base(w), abs=1e-15)

    def test_exactly_two_base_evaluations(self):
        count = [0]

        def base(v):
            count[0] += 1
            return float(np.sum(v))

        paloss.pa_fitness(base, np.ones(4), partition(), schedule(), 500)
        assert count[0] == 2

    def test_lambda_zero_recovers_base(self):
        w = np.array([0.5, -0.1, 0.3, -0.7])
        base = lambda v: float(np.sum(np.abs(v)))
        got = paloss.pa_fitness(base, w, partition(), schedule(lam=0.0), 700)
        assert got == pytest.approx(base(w), abs=1e-15)

    def test_non_finite_base_raises(self):
        with pytest.raises(ContractError):
            paloss.pa_fitness(lambda v: np.inf, np.ones(4), partition(),
                              schedule(), 10)
