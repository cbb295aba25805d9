"""Acceptance suite: one test per criterion, each printing a pass line
with its runtime.  Heavy Monte-Carlo products are shared via fixtures.

Run with `pytest tests/test_acceptance.py -v` (add `-s` for timings).
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from airmv.channel import ChannelModel, snr_to_noise_variance
from airmv.cli import main
from airmv.detector import VoteCensus
from airmv.encoder import normalization_offset
from airmv.experiments import (
    CerExperimentConfig,
    computation_rate,
    run_cer_experiment,
    run_pmepr_experiment,
    validate_lemma1,
)
from airmv.guidance import GuidanceConfig, run_mission
from airmv.sequences import gray_half_masks, identity_perm

SQRT2 = math.sqrt(2.0)
WORKERS = 2
SNR_DB = 10.0
SWEEP = (0.2, 0.35, 0.65, 0.8)

TABLE_ROWS = {
    (0, 0, 0): (1, 1, 1, -1, 1, 1, -1, 1),
    (1, 0, 0): (0, SQRT2, SQRT2, 0, 0, SQRT2, -SQRT2, 0),
    (1, 1, 0): (0, 0, 2, 0, 0, 2, 0, 0),
    (1, 1, 1): (0, 0, 0, 0, 0, 2 * SQRT2, 0, 0),
    (1, 1, -1): (0, 0, 2 * SQRT2, 0, 0, 0, 0, 0),
    (1, -1, 0): (0, 2, 0, 0, 0, 0, -2, 0),
    (-1, 0, 0): (SQRT2, 0, 0, -SQRT2, SQRT2, 0, 0, SQRT2),
}


def report(name: str, started: float) -> None:
    print(f"{name}: PASS ({time.time() - started:.1f} s)")


def read_gen_csv(path):
    values = {}
    for line in path.read_text().splitlines():
        if line.startswith("#") or line.startswith("index"):
            continue
        idx, re, im = line.split(",")
        values[int(idx)] = complex(float(re), float(im))
    return np.array([values[i] for i in range(len(values))])


# --------------------------------------------------------------------------
# Shared heavy runs


@pytest.fixture(scope="module")
def cer_results():
    out = {}
    for kind in ("flat_rayleigh", "selective_rayleigh"):
        cfg = CerExperimentConfig(
            n_sensors=50,
            m_list=(2, 8),
            p_sweep=SWEEP,
            z=0.1,
            channel=ChannelModel(kind, noise_var=snr_to_noise_variance(SNR_DB)),
            alpha=math.inf,
            trials=10_000,
            seed=20_260_810,
        )
        out[kind] = run_cer_experiment(cfg, workers=WORKERS)
    return out


@pytest.fixture(scope="module")
def guidance_runs():
    single_target = [(10.0, 8.0, 6.0)]
    start = (0.0, 0.0, 0.0)
    common = dict(max_rounds=20_000)
    runs = {
        "continuous": run_mission(
            single_target, start, GuidanceConfig(strategy="continuous", **common), seed=11
        ),
        "ideal_mv": run_mission(
            single_target, start, GuidanceConfig(strategy="ideal_mv", **common), seed=11
        ),
        "oac_m6": run_mission(
            single_target, start, GuidanceConfig(strategy="oac_mv", m=6, **common), seed=11
        ),
    }
    return runs


# --------------------------------------------------------------------------
# Criteria


def test_c1_table_golden_vectors(tmp_path):
    """`gen` reproduces every reference vote row to 1e-12."""
    started = time.time()
    for i, (votes, expected) in enumerate(sorted(TABLE_ROWS.items())):
        out = tmp_path / f"row{i}.csv"
        args = [
            "gen",
            "--votes", ",".join(str(v) for v in votes),
            "--perm", "3,2,1",
            "--alpha", "inf",
            "--n-phases", "2",
            "--phase-randomization", "off",
            "--out", str(out),
        ]
        assert main(args) == 0
        got = read_gen_csv(out)
        np.testing.assert_allclose(got, np.array(expected, dtype=complex), atol=1e-12)
    report("criterion 1 (reference vectors)", started)


def test_c2_pmepr_bound():
    """10^4 random sequences per absentee level stay within 3.02 dB; with
    no absentees the envelope is exactly flat."""
    started = time.time()
    fracs = []
    for z in (0.1, 0.3, 0.6):
        res = run_pmepr_experiment(
            n_sensors=50, m=8, p=0.1, z=z, alpha=math.inf,
            samples=10_000, seed=2, oversample=16, workers=WORKERS,
        )
        assert res.max_db <= 3.02, f"z={z}: max {res.max_db:.4f} dB"
        assert res.pmepr_db.min() >= 0.0
        fracs.append(res.fraction_below(0.1))
    # More cast votes concentrate energy: the flat-envelope mass grows.
    assert fracs[0] >= fracs[1] >= fracs[2]

    flat = run_pmepr_experiment(
        n_sensors=50, m=8, p=0.1, z=0.0, alpha=math.inf,
        samples=10_000, seed=3, oversample=16, workers=WORKERS,
    )
    assert flat.max_db <= 1e-9
    report("criterion 2 (PMEPR bound)", started)


def test_c3_closed_form_metric_means():
    """Empirical metric means over 1e5 independent-fading trials match the
    closed forms within 3 standard errors, across the full grid."""
    started = time.time()
    censuses = [VoteCensus(3, 1, 1), VoteCensus(10, 30, 10), VoteCensus(25, 25, 0)]
    for census, alpha, noise_var, m in itertools.product(
        censuses, (0.5, math.inf), (0.0, 0.1), (3, 6)
    ):
        rep = validate_lemma1(
            census, alpha, noise_var, m=m, trials=100_000, seed=0, workers=WORKERS
        )
        label = (
            f"census=({census.k_plus},{census.k_minus},{census.k_zero}) "
            f"alpha={alpha} var={noise_var} m={m}"
        )
        assert abs(rep.z_plus) <= 3.0, f"{label}: z_plus={rep.z_plus:.2f}"
        assert abs(rep.z_minus) <= 3.0, f"{label}: z_minus={rep.z_minus:.2f}"
    report("criterion 3 (closed-form metric means)", started)


def test_c4_half_energy_identities():
    """Both half-energy sum identities hold to 1e-9 relative error for 100
    random weight draws."""
    started = time.time()
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = int(rng.integers(1, 9))
        weights = rng.normal(scale=1.2, size=m)
        offset = normalization_offset(weights)
        masks = gray_half_masks(m, identity_perm(m)).astype(float)
        power = np.exp(2.0 * (weights @ masks + offset))
        for n in range(m):
            up = power[masks[n] == 1].sum()
            down = power[masks[n] == 0].sum()
            ratio = math.exp(2.0 * weights[n])
            assert up == pytest.approx(ratio * down, rel=1e-9)
            assert up == pytest.approx(2**m * ratio / (1.0 + ratio), rel=1e-9)
    report("criterion 4 (half-energy identities)", started)


def test_c5_cer_trends(cer_results):
    """Error-rate trends at K=50, z=0.1, SNR=10 dB, 1e4 trials/point."""
    started = time.time()
    flat = cer_results["flat_rayleigh"]
    selective = cer_results["selective_rayleigh"]

    # (a) longer sequences never hurt, in both fading channels.
    for res in (flat, selective):
        for p in SWEEP:
            assert res.point(8, p).cer <= res.point(2, p).cer, (
                f"{res.config.channel.kind} p={p}: "
                f"m8={res.point(8, p).cer} m2={res.point(2, p).cer}"
            )
    # (b) a stronger majority lowers the error rate.
    for res in (flat, selective):
        for m in (2, 8):
            assert res.point(m, 0.8).cer <= res.point(m, 0.65).cer, (
                f"{res.config.channel.kind} m={m}"
            )
    # (c) per-element fading enjoys a diversity gain over flat fading.
    for p in SWEEP:
        fl = flat.point(8, p)
        width = fl.ci_high - fl.ci_low
        assert selective.point(8, p).cer <= fl.cer + width, f"p={p}"
    report("criterion 5 (error-rate trends)", started)


def test_c6_computation_rate():
    started = time.time()
    assert computation_rate(3) == Fraction(3, 16)
    report("criterion 6 (computation rate)", started)


def test_c7a_continuous_beats_majority_step(guidance_runs):
    started = time.time()
    cont, ideal = guidance_runs["continuous"], guidance_runs["ideal_mv"]
    assert cont.completed
    assert np.linalg.norm(cont.final_position - np.array([10.0, 8.0, 6.0])) < 0.25
    assert ideal.completed
    assert cont.rounds < ideal.rounds
    report("criterion 7a (continuous feedback is fastest)", started)


def test_c7b_mv_strategies_reach_target(guidance_runs):
    started = time.time()
    for key in ("ideal_mv", "oac_m6"):
        log = guidance_runs[key]
        assert log.completed, key
        assert np.linalg.norm(log.final_position - np.array([10.0, 8.0, 6.0])) < 0.25
    report("criterion 7b (majority-vote strategies arrive)", started)


def test_c7c_longer_sequences_track_ideal_closer():
    """Averaged over 20 shared-sensor-noise seeds, the m=6 over-the-air
    trajectory stays strictly closer to the ideal majority-vote
    trajectory than the m=3 one."""
    started = time.time()
    gaps = {3: [], 6: []}
    for seed in range(20):
        ideal = run_mission(
            [(10.0, 8.0, 6.0)], (0.0, 0.0, 0.0),
            GuidanceConfig(strategy="ideal_mv"), seed=seed,
        )
        for m in (3, 6):
            oac = run_mission(
                [(10.0, 8.0, 6.0)], (0.0, 0.0, 0.0),
                GuidanceConfig(strategy="oac_mv", m=m), seed=seed,
            )
            n = min(ideal.rounds, oac.rounds)
            gap = np.linalg.norm(oac.position[:n] - ideal.position[:n], axis=1).mean()
            gaps[m].append(gap)
    mean3 = float(np.mean(gaps[3]))
    mean6 = float(np.mean(gaps[6]))
    assert mean6 < mean3, f"gap m6={mean6:.4f} vs m3={mean3:.4f}"
    report(f"criterion 7c (m=6 gap {mean6:.3f} < m=3 gap {mean3:.3f})", started)


def test_c7d_multi_waypoint_mission_completes():
    started = time.time()
    waypoints = [(1.0, 1.0, 6.0), (1.0, 4.0, 6.0), (7.0, 4.0, 6.0), (7.0, 4.0, 0.0)]
    start = (1.0, 1.0, 0.0)
    for strategy in ("continuous", "ideal_mv", "oac_mv"):
        cfg = GuidanceConfig(strategy=strategy, m=6, max_rounds=40_000)
        log = run_mission(waypoints, start, cfg, seed=5)
        assert log.completed, strategy
        assert int(log.waypoint_index.max()) == 3
    report("criterion 7d (multi-waypoint missions)", started)


def test_c8_determinism_across_workers(tmp_path):
    """Same seed, any worker count: identical result tables, for every
    experiment type; CSV output identical up to the timestamp line."""
    started = time.time()

    cer_cfg = CerExperimentConfig(
        n_sensors=20, m_list=(2, 4), p_sweep=(0.3, 0.7), z=0.1,
        channel=ChannelModel("selective_rayleigh", noise_var=0.1),
        trials=2_000, seed=99,
    )
    assert (
        run_cer_experiment(cer_cfg, workers=1).to_rows()
        == run_cer_experiment(cer_cfg, workers=3).to_rows()
    )

    pm1 = run_pmepr_experiment(1, m=6, p=0.2, z=0.3, samples=3_000, seed=99, workers=1)
    pm4 = run_pmepr_experiment(1, m=6, p=0.2, z=0.3, samples=3_000, seed=99, workers=4)
    np.testing.assert_array_equal(pm1.pmepr_db, pm4.pmepr_db)

    lm1 = validate_lemma1(VoteCensus(5, 3, 2), math.inf, 0.1, m=4, trials=20_000, seed=99, workers=1)
    lm2 = validate_lemma1(VoteCensus(5, 3, 2), math.inf, 0.1, m=4, trials=20_000, seed=99, workers=2)
    assert lm1.to_rows() == lm2.to_rows()

    cfg = GuidanceConfig(strategy="oac_mv", m=3, max_rounds=300)
    a = run_mission([(1.0, 1.0, 1.0)], (0.0, 0.0, 0.0), cfg, seed=99)
    b = run_mission([(1.0, 1.0, 1.0)], (0.0, 0.0, 0.0), cfg, seed=99)
    np.testing.assert_array_equal(a.position, b.position)
    np.testing.assert_array_equal(a.mv_detected, b.mv_detected)

    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    args = ["cer", "--m-list", "2", "--p-sweep", "0.4", "--trials", "500",
            "--sensors", "10", "--seed", "7"]
    assert main(args + ["--out", str(out1), "--workers", "1"]) == 0
    assert main(args + ["--out", str(out2), "--workers", "3"]) == 0

    def stripped(path):
        return [
            line for line in path.read_text().splitlines()
            if not line.startswith("# generated_at=")
        ]

    assert stripped(out1) == stripped(out2)
    report("criterion 8 (determinism)", started)
