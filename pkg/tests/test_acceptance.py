"""Acceptance suite: twelve numbered criteria, one pass/fail line each.

Each test prints ``criterion NN: PASS/FAIL`` with a short detail string and
then asserts, so a plain ``pytest -v`` run doubles as the acceptance report.
Heavy solves are shared through module-scoped fixtures.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy.sparse.linalg import splu

from graphnls import functional as fn
from graphnls.evolve import stability_probe
from graphnls.graphs import (
    double_bridge_graph,
    example_graph,
    halfline_graph,
    line_graph,
    star_graph,
)
from graphnls.mesh import build_mesh, interpolate, zero_function
from graphnls.solve import (
    SolveConfig,
    bound_state_catalogue,
    ground_state,
    minimize_on_edge,
    scan_mass_threshold,
)
from graphnls.soliton import energy_levels, gn_sharp_constant, make_model


def report(capsys, n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    with capsys.disabled():
        sys.stdout.write("\n" + line + "\n")


def smoothed_corpus(mesh, count, seed, strength=2):
    """Nonnegative smoothed random states used by criteria 7 to 9."""
    rng = np.random.default_rng(seed)
    A = (mesh.stiffness_matrix + mesh.mass_matrix).tocsc()
    lu = splu(A)
    out = []
    for _ in range(count):
        x = rng.standard_normal(mesh.ndof)
        for _ in range(strength):
            x = lu.solve(mesh.mass_matrix @ x)
        u = zero_function(mesh)
        u.values = np.abs(x)
        u.values *= 1.0 / math.sqrt(max(fn.mass(u), 1e-300))
        u.values *= rng.uniform(0.5, 3.0)
        out.append(u)
    return out


@pytest.fixture(scope="module")
def ex3_report():
    return minimize_on_edge(
        example_graph(3), "e", 10.0, 4.0, SolveConfig(h=0.01, truncation=6.0)
    )


@pytest.fixture(scope="module")
def corpus():
    mesh = build_mesh(star_graph(3), h=0.02, trunc=8.0)
    return smoothed_corpus(mesh, 50, seed=20240817)


def test_criterion_01_soliton_constant(capsys):
    t0 = time.monotonic()
    model4 = make_model(4.0)
    theta_err = abs(model4.theta - 1.0 / 96.0)
    worst = 0.0
    for p in (2.5, 3.0, 4.0, 5.0):
        model = make_model(p)
        line, _ = energy_levels(model, 2.0)
        # direct minimization: a single constrained solve on the bounded edge
        # of the two-halfline line graph recovers the free line soliton
        rep = minimize_on_edge(
            line_graph(10.0), "e", 2.0, p, SolveConfig(h=0.01, truncation="auto")
        )
        worst = max(worst, abs(rep.energy.total - line) / abs(line))
    dt = time.monotonic() - t0
    ok = theta_err < 1e-9 and worst < 1e-3 and dt < 60.0
    report(capsys, 1, ok, f"theta4 err {theta_err:.2e}, worst line-level rel err {worst:.2e}, {dt:.1f}s")
    assert ok


def test_criterion_02_halfline_level(capsys):
    t0 = time.monotonic()
    rep = ground_state(halfline_graph(), 2.0, 4.0, SolveConfig(h=0.01, truncation="auto"))
    rel = abs(rep.energy.total - (-1.0 / 3.0)) * 3.0
    dt = time.monotonic() - t0
    ok = rel < 1e-3 and dt < 20.0
    report(capsys, 2, ok, f"E = {rep.energy.total:.8f} vs -1/3, rel err {rel:.2e}, {dt:.1f}s")
    assert ok


def test_criterion_03_universal_sandwich(capsys):
    t0 = time.monotonic()
    model = make_model(4.0)
    mu = 10.0
    line, half = energy_levels(model, mu)
    tol = 1e-3 * abs(line)
    results = []
    ok = True
    for n in (1, 2, 3, 4):
        rep = ground_state(example_graph(n), mu, 4.0, SolveConfig(h=0.01, truncation=6.0))
        inside = half - tol <= rep.energy.total <= line + tol
        ok = ok and inside
        results.append(f"ex{n}:{rep.energy.total:.4f}")
    dt = time.monotonic() - t0
    report(capsys, 3, ok, f"[{half:.4f}, {line:.4f}] contains " + " ".join(results) + f", {dt:.0f}s")
    assert ok


def test_criterion_04_example4_ordering(capsys):
    t0 = time.monotonic()
    mu = 10.0
    cfg = SolveConfig(h=0.01, truncation=6.0)
    g = example_graph(4)
    reps = {e: minimize_on_edge(g, e, mu, 4.0, cfg) for e in ("e", "f", "g")}
    E = {k: r.energy.total for k, r in reps.items()}
    line = -make_model(4.0).theta * mu ** 3
    pair_rel = abs(E["e"] - E["g"]) / abs(E["e"])
    below = E["e"] < line and E["g"] < line
    f_above = E["f"] >= line - 1e-3 * abs(line)
    dt = time.monotonic() - t0
    ok = pair_rel < 1e-6 and below and f_above and dt < 300.0
    report(
        capsys,
        4,
        ok,
        f"E(e)={E['e']:.6f} E(g)={E['g']:.6f} rel gap {pair_rel:.1e}, "
        f"E(f)={E['f']:.6f} vs line {line:.6f}, {dt:.0f}s",
    )
    assert ok


def test_criterion_05_example3_natural_constraint(ex3_report, capsys):
    mu = 10.0
    line = -make_model(4.0).theta * mu ** 3
    rel = abs(ex3_report.energy.total - line) / abs(line)
    ok = rel < 1e-3
    report(capsys, 5, ok, f"E(e) = {ex3_report.energy.total:.6f} vs {line:.6f}, rel err {rel:.2e}")
    assert ok


def test_criterion_06_example1_catalogue(capsys):
    t0 = time.monotonic()
    reports = bound_state_catalogue(
        example_graph(1), 50.0, 4.0, SolveConfig(h=0.02, truncation=2.0), jobs=4
    )
    n_interior = sum(r.status == "interior" for r in reports)
    worst_el = max(r.el_residual for r in reports)
    worst_kir = max(r.kirchhoff_residual for r in reports)
    min_val = min(float(np.min(np.real(r.minimizer.values))) for r in reports)
    min_margin = min(r.localization_margin for r in reports)
    min_lam = min(r.lam for r in reports)
    dt = time.monotonic() - t0
    ok = (
        len(reports) == 13
        and n_interior == 13
        and min_lam > 0
        and min_val > 0
        and min_margin > 0
        and worst_el < 1e-4
        and worst_kir < 1e-4
        and dt < 900.0
    )
    report(
        capsys,
        6,
        ok,
        f"{n_interior}/13 interior, el<= {worst_el:.1e}, kir<= {worst_kir:.1e}, "
        f"min u {min_val:.1e}, min margin {min_margin:.2f}, {dt:.0f}s",
    )
    assert ok


def test_criterion_07_rearrangement_suite(corpus, capsys):
    worst_l2 = worst_lp = 0.0
    kin_ok = True
    for u in corpus:
        v = fn.rearrangement(u)
        worst_l2 = max(worst_l2, abs(fn.mass(v) - fn.mass(u)) / fn.mass(u))
        lpu = fn.lp_power_exact(u, 4.0)
        worst_lp = max(worst_lp, abs(fn.lp_power_exact(v, 4.0) - lpu) / lpu)
        kin_ok = kin_ok and fn.kinetic(v) <= fn.kinetic(u) + 1e-12

    mesh = build_mesh(star_graph(3), h=0.005, trunc=6.0)
    prof = lambda x: np.exp(-((x - 1.5) ** 2))
    sym = interpolate(mesh, {f"h{i}": prof for i in (1, 2, 3)})
    star_drop = fn.kinetic(fn.rearrangement(sym)) <= fn.kinetic(sym) / 9.0 + 1e-6

    ok = worst_l2 < 1e-4 and worst_lp < 1e-4 and kin_ok and star_drop
    report(
        capsys,
        7,
        ok,
        f"L2 err {worst_l2:.1e}, Lp err {worst_lp:.1e}, kinetic monotone {kin_ok}, "
        f"star 1/9 factor {star_drop}",
    )
    assert ok


def test_criterion_08_preimage_energy_bound(corpus, ex3_report, capsys):
    p = 4.0
    worst = -np.inf
    ok = True
    states = list(corpus) + [ex3_report.minimizer]
    for u in states:
        peak = float(np.max(np.abs(u.values)))
        _, n_ess = fn.preimage_count(u, [0.5 * peak])
        n_ess = max(n_ess, 1)
        gap = fn.energy(u, p).total - fn.ge3_bound(fn.mass(u), n_ess, p)
        worst = max(worst, -gap)
        ok = ok and gap >= -1e-6
    report(capsys, 8, ok, f"{len(states)} states, worst bound violation {worst:.2e}")
    assert ok


def test_criterion_09_inequality_suite(capsys):
    mesh = build_mesh(star_graph(3), h=0.02, trunc=8.0)
    states = smoothed_corpus(mesh, 100, seed=7)
    model = make_model(4.0)
    sharp = gn_sharp_constant(model)
    worst_gn = max(fn.gn_ratio(u, 4.0) for u in states)
    worst_linf = max(fn.linf_ratio(u) for u in states)
    ok = worst_gn <= sharp * (1.0 + 1e-9) and worst_linf <= 1.0 + 1e-6
    report(capsys, 9, ok, f"max GN ratio {worst_gn:.6f} (sharp {sharp:.6f}), max Linf ratio {worst_linf:.6f}")
    assert ok


def test_criterion_10_gradient_correctness(capsys):
    mesh = build_mesh(line_graph(10.0), h=0.01, trunc=6.0)
    rng = np.random.default_rng(123)
    p = 4.0
    worst = 0.0
    for _ in range(20):
        u = zero_function(mesh)
        u.values = rng.standard_normal(mesh.ndof)
        eta = rng.standard_normal(mesh.ndof)
        directional = float(fn.grad_energy(u, p) @ eta)
        t = 1e-6
        up, um = u.copy(), u.copy()
        up.values = u.values + t * eta
        um.values = u.values - t * eta
        fd = (fn.energy(up, p).total - fn.energy(um, p).total) / (2.0 * t)
        worst = max(worst, abs(directional - fd) / max(abs(fd), 1e-12))
    ok = worst < 1e-5
    report(capsys, 10, ok, f"20 random (u, eta) pairs, worst rel err {worst:.2e}")
    assert ok


def test_criterion_11_stability_probe(ex3_report, capsys):
    t0 = time.monotonic()
    probe = stability_probe(
        ex3_report, epsilon=1e-2, t_final=10.0, dt=1e-3, seed=0, fp_tol=1e-12, stride=20
    )
    still = stability_probe(
        ex3_report, epsilon=0.0, t_final=10.0, dt=1e-3, seed=0, fp_tol=1e-12, stride=20
    )
    dt = time.monotonic() - t0
    ok = (
        probe.max_distance < 10.0 * 1e-2
        and probe.mass_drift < 1e-8
        and still.max_distance < 1e-3
    )
    report(
        capsys,
        11,
        ok,
        f"max dist {probe.max_distance:.4f} (< 0.1), mass drift {probe.mass_drift:.1e}, "
        f"eps=0 dist {still.max_distance:.1e}, {dt:.0f}s",
    )
    assert ok


def test_criterion_12_threshold_scan(capsys):
    t0 = time.monotonic()
    scan = scan_mass_threshold(
        double_bridge_graph(0.3),
        "e",
        4.0,
        [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
        SolveConfig(h=0.02, truncation=30.0),
        jobs=4,
    )
    small = [s for mu, s in zip(scan.mu_grid, scan.statuses) if mu <= 0.5]
    ok = (
        all(s in ("constraint-active", "escaped") for s in small)
        and scan.statuses[-1] == "interior"
        and scan.threshold is not None
        and scan.monotone
    )
    dt = time.monotonic() - t0
    report(
        capsys,
        12,
        ok,
        f"statuses {scan.statuses}, empirical threshold {scan.threshold}, {dt:.0f}s",
    )
    assert ok
