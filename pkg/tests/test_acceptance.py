"""End-to-end acceptance checks.

Criteria 1-6 are fast property checks. Criteria 7-9 audit a full two-arm
pruning sweep at the default configuration over rates 0.50-0.85; the sweep
runs once per session (roughly 20-30 minutes on one core). Set
PAWPRUNE_ACCEPTANCE_RESULTS to a previously written results.csv to audit an
existing run instead of recomputing it.

Each criterion prints one pass/fail line on the terminal.
"""

import os
import time

import numpy as np
import pytest

from pawprune import harness, params as ps, paloss, spsa
from pawprune.frae import FraeConfig, build_partition, code_sequence, init_model
from pawprune.fast import DatasetFitness

ACCEPTANCE_RATES = (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85)


def _report(capsys, num, name, ok, detail=""):
    with capsys.disabled():
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"\n[{verdict}] criterion {num}: {name}{suffix}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="session")
def sweep_records(tmp_path_factory):
    path = os.environ.get("PAWPRUNE_ACCEPTANCE_RESULTS")
    if path:
        return harness.read_results(path)
    config = harness.ExperimentConfig(rate_grid=ACCEPTANCE_RATES)
    outdir = tmp_path_factory.mktemp("acceptance_sweep")
    records, all_ok = harness.sweep(config, outdir=str(outdir))
    assert all_ok, "sweep reported failed cells"
    return records


def test_criterion_1_mask_consistency(capsys):
    part = build_partition(FraeConfig())
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    ok = True
    for _ in range(1000):
        w = rng.normal(size=part.size)
        rate = float(rng.uniform(0.0, 1.0))
        scope = ps.WHOLE_MODEL if rng.integers(2) else ps.DECODER_ONLY
        mask = ps.select_pruned_indices(w, part, rate, scope)
        pruned = ps.apply_mask(w, mask)
        if not np.array_equal(w + ps.pruning_direction(w, mask), pruned):
            ok = False
            break
        if not np.array_equal(ps.apply_mask(pruned, mask), pruned):
            ok = False
            break
        n_eligible = len(part.eligible_indices(scope))
        if len(mask.pruned_indices) != int(np.floor(rate * n_eligible + 0.5)):
            ok = False
            break
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 1.0
    _report(capsys, 1, "pruning arithmetic consistency", ok,
            f"1000 random triples in {elapsed:.2f}s")


def test_criterion_2_spsa_sanity(capsys):
    sched = spsa.GainSchedule(a=0.5, A=100.0, gamma=0.602, c=0.05, beta=0.101)
    target = np.random.default_rng(7).uniform(-1.0, 1.0, size=10)
    f = lambda w: -float(np.sum((w - target) ** 2))
    start = time.perf_counter()
    hits = 0
    for seed in range(10):
        w0 = target + np.random.default_rng(100 + seed).uniform(-1, 1, size=10)
        w, _ = spsa.optimize(w0, f, sched, 2000, rng_seed=seed)
        if np.linalg.norm(w - target) < 0.05:
            hits += 1
    elapsed = time.perf_counter() - start
    ok = hits >= 9 and elapsed < 5.0
    _report(capsys, 2, "SPSA quadratic convergence", ok,
            f"{hits}/10 seeds within 0.05 in {elapsed:.2f}s")


def test_criterion_3_gain_formula(capsys):
    a0, c0 = spsa.GainSchedule().gain_at(0)
    err_a = abs(a0 - 1.0 / 10274.0 ** 0.602) / (1.0 / 10274.0 ** 0.602)
    err_c = abs(c0 - 0.020765) / 0.020765
    ok = err_a < 1e-12 and err_c < 1e-12
    _report(capsys, 3, "gain schedule closed form", ok,
            f"rel err a_0={err_a:.2e}, c_0={err_c:.2e}")


def test_criterion_4_schedule_boundaries(capsys):
    part = build_partition(FraeConfig())
    rng = np.random.default_rng(4004)
    ok = True
    for g_kind in paloss.G_KINDS:
        sched = paloss.PerturbationSchedule(g_kind=g_kind, n_max=1000,
                                            rate=0.6, scope=ps.WHOLE_MODEL)
        for _ in range(25):  # 25 vectors x 4 kinds = 100 cases
            w = rng.normal(size=part.size)
            if not np.array_equal(paloss.perturbed_weights(w, part, sched, 0), w):
                ok = False
            mask = ps.select_pruned_indices(w, part, 0.6, ps.WHOLE_MODEL)
            end = paloss.perturbed_weights(w, part, sched, sched.n_max)
            if not np.array_equal(end, ps.apply_mask(w, mask)):
                ok = False
    _report(capsys, 4, "perturbation schedule boundaries", ok,
            "identity at n=0, exact mask at n=n_max, 4 kinds x 25 vectors")


def test_criterion_5_frozen_zero_preservation(capsys):
    config = harness.ExperimentConfig()
    train, _ = harness.make_dataset(config)
    fit = DatasetFitness(config.model, train, config.fitness)
    model = init_model(config.model, seed=55)
    mask = ps.select_pruned_indices(model.params, model.partition, 0.6,
                                    ps.WHOLE_MODEL)
    w, _ = spsa.optimize(model.params, fit, config.gain, 8000, rng_seed=55,
                         freeze=mask)
    ok = bool(np.all(w[mask.pruned_indices] == 0.0))
    _report(capsys, 5, "frozen coordinates stay zero", ok,
            f"8000 fine-tune iterations, {len(mask.pruned_indices)} pruned")


def test_criterion_6_zero_delay(capsys):
    model = init_model(FraeConfig(), seed=66)
    rng = np.random.default_rng(6006)
    ok = True
    for _ in range(50):
        frames = rng.uniform(size=(20, 22))
        t = int(rng.integers(0, 19))
        perturbed = frames.copy()
        perturbed[t + 1] = rng.uniform(size=22)
        _, rec_a = code_sequence(model, frames)
        _, rec_b = code_sequence(model, perturbed)
        if not np.array_equal(rec_a[:t + 1], rec_b[:t + 1]):
            ok = False
            break
    _report(capsys, 6, "zero-delay reconstruction", ok,
            "50 random sequences, bit-exact prefixes")


def test_criterion_7_post_prune_shape(capsys, sweep_records):
    ok_rows = [r for r in sweep_records if r.status == "ok"]
    geq = 0
    strict = 0
    details = []
    for rate in ACCEPTANCE_RATES:
        pa = np.median([r.fitness_post_prune for r in ok_rows
                        if r.arm == harness.ARM_PA and r.rate == rate])
        base = np.median([r.fitness_post_prune for r in ok_rows
                          if r.arm == harness.ARM_BASELINE and r.rate == rate])
        geq += pa >= base
        strict += pa > base
        details.append(f"{rate:.2f}:{pa - base:+.3f}")
    ok = geq == len(ACCEPTANCE_RATES) and strict >= 5
    _report(capsys, 7, "post-prune advantage of pruning-aware arm", ok,
            f"median gap by rate {' '.join(details)}; strict at {strict}/8")


def test_criterion_8_pre_prune_tradeoff(capsys, sweep_records):
    ok_rows = [r for r in sweep_records if r.status == "ok"]
    seeds = sorted({r.seed for r in ok_rows})
    ok = True
    details = []
    for rate in ACCEPTANCE_RATES:
        count = 0
        for seed in seeds:
            pa = [r.fitness_pre_prune for r in ok_rows
                  if r.arm == harness.ARM_PA and r.rate == rate
                  and r.seed == seed]
            ref = [r.fitness_pre_prune for r in ok_rows
                   if r.arm == harness.ARM_BASELINE and r.rate == rate
                   and r.seed == seed]
            if pa and ref and pa[0] <= ref[0]:
                count += 1
        details.append(f"{rate:.2f}:{count}/{len(seeds)}")
        if count < 4:
            ok = False
    _report(capsys, 8, "pre-prune fitness traded for robustness", ok,
            f"seeds with pa <= reference per rate: {' '.join(details)}")


def test_criterion_9_iteration_budget(capsys, sweep_records):
    ok_rows = [r for r in sweep_records if r.status == "ok"]
    budgets = {r.total_iterations for r in ok_rows}
    ok = bool(ok_rows) and budgets == {8000}
    _report(capsys, 9, "equal iteration budget per arm", ok,
            f"{len(ok_rows)} cells, totals {sorted(budgets)}")
