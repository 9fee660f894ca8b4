"""End-to-end acceptance checks; each test logs one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from ssbtma.geometry import ArrayGeometry, ArrayKind, linear_uniform, sinc_kernel
from ssbtma.modulation import (BeamMode, BeamTask, Branch, ElementSchedule, ExcitationWeights,
                               ModulationSchedule, joint_harmonic_coefficient, overlap_tau,
                               overlap_tau_prime)
from ssbtma.optimizer import DeConfig, de_optimize, design_metrics
from ssbtma.oracle import (OracleConfig, harmonic_power_integral, random_design, series_overlaps,
                           series_total_power, sphere_integral_power, sphere_kernel,
                           time_domain_coefficients)
from ssbtma.pattern import chebyshev_taper
from ssbtma.power import (TmaDesign, power_report, steered_design, total_power, useful_power_minus3,
                          useful_power_plus1)

SEEDS = (1, 2, 3)
DE = DeConfig(population=80, mutation=0.4, crossover=0.5, max_generations=500,
              w_sll=1.0, w_loss=10.0, sll_ref=-30.0)


def _run(mode, seed):
    geom = linear_uniform(16, 0.5)
    task = BeamTask(80.0, 120.0, mode)
    cfg = DeConfig(**{**DE.__dict__, "seed": seed})
    start = time.perf_counter()
    result = de_optimize(task, geom, chebyshev_taper(16, -30.0), cfg)
    return result, time.perf_counter() - start


@pytest.fixture(scope="module")
def dual_runs():
    return [_run(BeamMode.DUAL, s) for s in SEEDS]


@pytest.fixture(scope="module")
def single_runs():
    return [_run(BeamMode.SINGLE, s) for s in SEEDS]


def test_toy_example(acceptance):
    start = time.perf_counter()
    toy = TmaDesign(linear_uniform(2, 0.25), ExcitationWeights([1, 1], [0, 0]),
                    ModulationSchedule.from_arrays([0.0, 0.25], [0.25, 0.5]))
    r = power_report(toy)
    elapsed = time.perf_counter() - start
    ok = (abs(r.total - 25.13) <= 0.01 and abs(r.useful_plus1 - 20.37) <= 0.01
          and abs(r.useful_minus3 - 2.26) <= 0.01 and abs(100 * r.eta_dual - 90.05) <= 0.02
          and abs(100 * r.eta_single - 81.06) <= 0.02 and elapsed < 1.0)
    acceptance.check(1, "toy example regression", ok,
                     f"P={r.total:.4f} U+1={r.useful_plus1:.4f} U-3={r.useful_minus3:.4f} "
                     f"eta_dual={100 * r.eta_dual:.3f}% eta_single={100 * r.eta_single:.3f}% t={elapsed:.3f}s")


def test_chebyshev_baseline(acceptance):
    start = time.perf_counter()
    d = steered_design(linear_uniform(16, 0.5), BeamTask(80, 120), np.ones(16), chebyshev_taper(16, -30))
    r = power_report(d)
    m1, m3 = design_metrics(d, 0.02)
    elapsed = time.perf_counter() - start
    ok = (abs(100 * r.loss_dual_fraction - 9.94) <= 0.3 and abs(100 * r.loss_single_fraction - 18.94) <= 0.3
          and abs(m1.sll_db + 30) <= 0.2 and abs(m1.fnbw_deg - 21.77) <= 0.3
          and abs(m3.sll_db + 39.54) <= 0.3 and abs(m3.fnbw_deg - 25.04) <= 0.5 and elapsed < 5.0)
    acceptance.check(2, "Chebyshev baseline", ok,
                     f"loss_dual={100 * r.loss_dual_fraction:.3f}% loss_single={100 * r.loss_single_fraction:.3f}% "
                     f"SLL+1={m1.sll_db:.3f} FNBW+1={m1.fnbw_deg:.3f} SLL-3={m3.sll_db:.3f} "
                     f"FNBW-3={m3.fnbw_deg:.3f} t={elapsed:.2f}s")


def test_dual_beam_optimization(acceptance, dual_runs):
    loss = np.median([100 * r.report.loss_dual_fraction for r, _ in dual_runs])
    sll = np.median([r.metrics_plus1.sll_db for r, _ in dual_runs])
    fnbw = np.median([r.metrics_plus1.fnbw_deg for r, _ in dual_runs])
    gap = np.median([-r.metrics_minus3.peak_db for r, _ in dual_runs])
    slowest = max(t for _, t in dual_runs)
    ok = loss <= 5.0 and sll <= -29.5 and abs(fnbw - 21.77) <= 0.5 and abs(gap - 11.0) <= 1.5 and slowest <= 600
    acceptance.check(3, "dual-beam optimization", ok,
                     f"median loss_dual={loss:.3f}% SLL+1={sll:.2f} FNBW+1={fnbw:.2f} gap={gap:.2f}dB "
                     f"slowest={slowest:.1f}s")


def test_single_beam_optimization(acceptance, single_runs):
    loss = np.median([100 * r.report.loss_single_fraction for r, _ in single_runs])
    sll = np.median([r.metrics_plus1.sll_db for r, _ in single_runs])
    slowest = max(t for _, t in single_runs)
    ok = loss <= 9.0 and sll <= -29.5 and slowest <= 600
    acceptance.check(4, "single-beam optimization", ok,
                     f"median loss_single={loss:.3f}% SLL+1={sll:.2f} slowest={slowest:.1f}s")


def test_oracle_equivalence(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    cfg = OracleConfig(truncation=10_000, sphere_grid=(128, 128))
    err_total = err_useful = 0.0
    for i in range(100):
        d = random_design(rng, int(rng.integers(1, 9)), planar=bool(i % 2))
        p = total_power(d)
        err_total = max(err_total, abs(series_total_power(d, cfg) - p) / abs(p))
        for k, fn in ((1, useful_power_plus1), (-3, useful_power_minus3)):
            u = fn(d)
            err_useful = max(err_useful, abs(harmonic_power_integral(d, k, cfg) - u) / abs(u))
    elapsed = time.perf_counter() - start
    ok = err_total <= 5e-4 and err_useful <= 1e-4 and elapsed < 120
    acceptance.check(5, "oracle equivalence", ok,
                     f"total rel err={err_total:.2e} useful rel err={err_useful:.2e} t={elapsed:.1f}s")


def _random_entries(rng, count):
    on = rng.uniform(-1.5, 2.5, count)
    tau = rng.uniform(0.0, 0.5, count)
    return [ElementSchedule(a, a + t) for a, t in zip(on, tau)]


def test_harmonic_selection_rule(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    ks = np.arange(-8, 9)
    off = ks[ks % 4 != 1]
    worst_closed = worst_time = 0.0
    for e in _random_entries(rng, 1000):
        worst_closed = max(worst_closed, max(abs(joint_harmonic_coefficient(e, int(k))) for k in off))
        joint = time_domain_coefficients(e, Branch.I, off) - 1j * time_domain_coefficients(e, Branch.Q, off)
        worst_time = max(worst_time, float(np.max(np.abs(joint))))
    elapsed = time.perf_counter() - start
    ok = worst_closed <= 1e-12 and worst_time <= 1e-12 and elapsed < 10
    acceptance.check(6, "harmonic selection rule", ok,
                     f"max |alpha| closed={worst_closed:.1e} time-domain={worst_time:.1e} t={elapsed:.2f}s")


def test_overlap_identities(acceptance):
    rng = np.random.default_rng(7)
    a_list, b_list = _random_entries(rng, 1000), _random_entries(rng, 1000)
    ident = 0.0
    series = 0.0
    cfg = OracleConfig(truncation=10_000)
    for a, b in zip(a_list, b_list):
        ident = max(ident,
                    abs(overlap_tau(a, b) - overlap_tau(b, a)),
                    abs(overlap_tau_prime(a, b) + overlap_tau_prime(b, a)),
                    abs(overlap_tau(a, a) - 2 * a.tau),
                    abs(overlap_tau_prime(a, a)))
        t, tp = series_overlaps(a, b, cfg)
        series = max(series, abs(t - overlap_tau(a, b)), abs(tp - overlap_tau_prime(a, b)))
    ok = ident <= 1e-12 and series <= 5e-4
    acceptance.check(7, "overlap-calculus identities", ok,
                     f"identity err={ident:.1e} series err={series:.2e}")


def test_planar_reduction(acceptance):
    rng = np.random.default_rng(8)
    worst_path = 0.0
    for _ in range(50):
        d = random_design(rng, int(rng.integers(2, 9)))
        z = d.geometry.z
        direct = sinc_kernel(2 * np.pi * np.abs(z[:, None] - z[None, :]))
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        tilted = ArrayGeometry(np.outer(z, u), ArrayKind.VOLUMETRIC)
        planar = TmaDesign(tilted, d.weights, d.schedule)
        worst_path = max(worst_path,
                         float(np.max(np.abs(tilted.kernel_matrix() - direct))),
                         abs(total_power(planar) - total_power(d)) / total_power(d))
    cfg = OracleConfig(sphere_grid=(128, 128))
    worst_sphere = 0.0
    for _ in range(50):
        dr = rng.uniform(-2, 2, 3)
        expected = 4 * math.pi * float(sinc_kernel(2 * math.pi * np.linalg.norm(dr)))
        worst_sphere = max(worst_sphere, abs(sphere_kernel(dr, cfg) - expected) / (4 * math.pi))
    for i in range(10):
        d = random_design(rng, 5, planar=bool(i % 2))
        worst_sphere = max(worst_sphere, abs(sphere_integral_power(d, cfg) - total_power(d)) / total_power(d))
    ok = worst_path <= 1e-10 and worst_sphere <= 1e-6
    acceptance.check(8, "planar reduction and sphere kernel", ok,
                     f"path err={worst_path:.1e} sphere err={worst_sphere:.1e}")


def test_optimizer_properties(acceptance, dual_runs, single_runs):
    runs = [r for r, _ in dual_runs + single_runs]
    monotone = all(np.all(np.diff(r.cost_trace) <= 0) for r in runs)
    repeat, _ = _run(BeamMode.DUAL, SEEDS[0])
    reproducible = np.array_equal(repeat.cost_trace, dual_runs[0][0].cost_trace)
    changes = [abs(r.cost_trace[-51] - r.cost_trace[-1]) / r.cost_trace[-1] for r in runs]
    plateau = max(changes) < 1e-3
    acceptance.check(9, "optimizer properties", monotone and reproducible and plateau,
                     f"monotone={monotone} reproducible={reproducible} "
                     f"max change over last 50 gens={max(changes):.1e}")
