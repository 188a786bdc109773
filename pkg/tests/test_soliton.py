import math

import numpy as np
import pytest

from graphnls.functional import energy, mass
from graphnls.graphs import double_bridge_graph, example_graph
from graphnls.mesh import argmax, build_mesh
from graphnls.soliton import (
    SolitonError,
    compact_competitor,
    energy_levels,
    gn_sharp_constant,
    make_model,
    soliton_profile,
    soliton_residual,
)


def test_exponent_range_enforced():
    for p in (2.0, 6.0, 7.5, -1.0):
        with pytest.raises(SolitonError):
            make_model(p)


def test_theta_quartic_closed_form():
    # at p = 4 the soliton energy constant is 1/96 exactly
    model = make_model(4.0)
    assert model.theta == pytest.approx(1.0 / 96.0, abs=1e-12)
    assert model.beta == pytest.approx(1.0)
    assert model.alpha == pytest.approx(1.0)


def test_quartic_multiplier_closed_form():
    # mass mu soliton at p = 4 has lambda = (mu / 4)^2
    model = make_model(4.0)
    for mu in (0.5, 2.0, 10.0):
        assert model.lambda_for_mass(mu) == pytest.approx((mu / 4.0) ** 2, rel=1e-12)
        assert model.mass_for_lambda((mu / 4.0) ** 2) == pytest.approx(mu, rel=1e-12)


def test_mass_lambda_inverse_pair():
    rng = np.random.default_rng(11)
    for p in (2.5, 3.0, 4.0, 5.0, 5.7):
        model = make_model(p)
        for mu in rng.uniform(0.2, 30.0, size=4):
            lam = model.lambda_for_mass(mu)
            assert model.mass_for_lambda(lam) == pytest.approx(mu, rel=1e-10)


def test_profile_mass_matches_request():
    for p in (3.0, 4.0, 5.0):
        model = make_model(p)
        f, df, lam, peak = soliton_profile(model, 3.0)
        x = np.linspace(-80.0 / math.sqrt(lam), 80.0 / math.sqrt(lam), 400001)
        m = np.trapezoid(f(x) ** 2, x)
        assert m == pytest.approx(3.0, rel=1e-6)
        assert f(0.0) == pytest.approx(peak, rel=1e-12)


def test_soliton_residual_vanishes():
    rng = np.random.default_rng(5)
    for p in (2.5, 3.5, 4.0, 5.5):
        model = make_model(p)
        x = rng.uniform(-5.0, 5.0, size=64)
        r = soliton_residual(model, 2.0, x)
        assert np.max(np.abs(r)) < 1e-10


def test_energy_levels_scaling_and_halfline_gain():
    model = make_model(4.0)
    line1, half1 = energy_levels(model, 1.0)
    line2, half2 = energy_levels(model, 2.0)
    assert line1 == pytest.approx(-1.0 / 96.0, rel=1e-10)
    assert line2 / line1 == pytest.approx(2.0 ** 3, rel=1e-10)  # mu^(2 beta + 1)
    assert half1 / line1 == pytest.approx(4.0, rel=1e-12)       # 2^(2 beta)
    assert half1 < line1 < 0.0


def test_gn_sharp_constant_quartic():
    # p = 4 sharp constant on noncompact graphs is 2 / sqrt(3)
    model = make_model(4.0)
    assert gn_sharp_constant(model) == pytest.approx(2.0 / math.sqrt(3.0), rel=1e-10)


def test_compact_competitor_beats_target():
    g = double_bridge_graph(4.0)
    mesh = build_mesh(g, h=0.01, trunc=5.0)
    model = make_model(4.0)
    mu, eps = 10.0, 0.1
    u = compact_competitor(model, mu, eps, mesh, "e")
    assert mass(u) == pytest.approx(mu, rel=1e-12)
    line, _ = energy_levels(model, mu)
    assert energy(u, 4.0).total <= (1.0 - eps) * line
    eid, _, _ = argmax(u)
    assert eid == "e"
    # supported on the edge only
    for em in mesh.edge_meshes:
        if em.edge_id != "e":
            assert np.max(np.abs(u.edge_values(em.edge_id))) < 1e-12 * np.max(u.values)


def test_compact_competitor_terminal_tip():
    # terminal variant peaks at the degree-one tip of the edge
    g = example_graph(4)  # edge g: v2 - v4 with v4 of degree 1
    mesh = build_mesh(g, h=0.01, trunc=5.0)
    model = make_model(4.0)
    u = compact_competitor(model, 10.0, 0.1, mesh, "g", terminal=True)
    em = mesh.edge_mesh("g")
    vals = u.edge_values("g")
    tip_end = vals[-1] if mesh.graph.degree(mesh.graph.edge("g").dst) == 1 else vals[0]
    assert tip_end == pytest.approx(np.max(vals), rel=1e-12)
    _, half = energy_levels(model, 10.0)
    assert energy(u, 4.0).total <= 0.9 * half


def test_compact_competitor_mass_too_small():
    g = double_bridge_graph(0.3)
    mesh = build_mesh(g, h=0.01, trunc=5.0)
    model = make_model(4.0)
    with pytest.raises(SolitonError, match="fitting threshold"):
        compact_competitor(model, 0.1, 0.1, mesh, "e")


def test_compact_competitor_rejects_halfline():
    g = double_bridge_graph(4.0)
    mesh = build_mesh(g, h=0.02, trunc=5.0)
    with pytest.raises(SolitonError):
        compact_competitor(make_model(4.0), 10.0, 0.1, mesh, "h1")
