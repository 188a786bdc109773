"""Crank-Nicolson time stepping and orbital-stability diagnostics.

The semidiscrete flow is i M du/dt = K u - n(u).  One step solves

    (i M / dt - K / 2) u_new = (i M / dt + K / 2) u_old - n(u_mid)

with u_mid = (u_old + u_new) / 2, by fixed-point iteration on the
prefactored linear operator.  At fixed-point convergence the scheme
conserves the discrete mass exactly and a stationary state evolves as
exp(i lambda t) times itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import splu

from . import functional as fn
from .mesh import GraphFunction, Mesh

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EvolveError(RuntimeError):
    """Raised when a time step fails to converge or the state blows up."""


@dataclass
class EvolveResult:
    final: GraphFunction
    times: np.ndarray
    mass_history: np.ndarray
    energy_history: np.ndarray
    sweeps_max: int

    @property
    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass_history - self.mass_history[0])))

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy_history - self.energy_history[0])))


def evolve(
    u0: GraphFunction,
    p: float,
    t_final: float,
    dt: float,
    fp_tol: float = 1e-10,
    max_sweeps: int = 50,
    callback: Optional[Callable[[float, GraphFunction], None]] = None,
) -> EvolveResult:
    """March the Crank-Nicolson flow from 0 to ``t_final`` in steps of ``dt``."""
    if dt <= 0 or t_final < dt:
        raise EvolveError("need 0 < dt <= t_final")
    n_steps = int(round(t_final / dt))
    mesh = u0.mesh
    M = mesh.mass_matrix
    K = mesh.stiffness_matrix
    A = ((1j / dt) * M - 0.5 * K).tocsc()
    B = (1j / dt) * M + 0.5 * K
    solver = splu(A)

    u = u0.values.astype(complex)
    scale0 = float(np.max(np.abs(u))) or 1.0
    times = np.zeros(n_steps + 1)
    masses = np.zeros(n_steps + 1)
    energies = np.zeros(n_steps + 1)
    gf = GraphFunction(mesh, u)
    masses[0] = fn.mass(gf)
    energies[0] = fn.energy(gf, p).total
    sweeps_max = 0

    for step in range(n_steps):
        c = B @ u
        un = u.copy()
        converged = False
        for sweep in range(max_sweeps):
            mid = 0.5 * (u + un)
            rhs = c - fn.nonlinear_term(GraphFunction(mesh, mid), p)
            un_next = solver.solve(rhs)
            delta = float(np.max(np.abs(un_next - un)))
            un = un_next
            if delta <= fp_tol * scale0:
                converged = True
                sweeps_max = max(sweeps_max, sweep + 1)
                break
        if not converged:
            raise EvolveError(
                f"fixed-point iteration stalled at step {step}: "
                f"last update {delta:.3e} (try a smaller dt)"
            )
        if not np.all(np.isfinite(un)):
            raise EvolveError(f"non-finite values at step {step}; the state blew up")
        u = un
        gf = GraphFunction(mesh, u)
        times[step + 1] = (step + 1) * dt
        masses[step + 1] = fn.mass(gf)
        energies[step + 1] = fn.energy(gf, p).total
        if callback is not None:
            callback(times[step + 1], gf)

    return EvolveResult(
        final=GraphFunction(mesh, u),
        times=times,
        mass_history=masses,
        energy_history=energies,
        sweeps_max=sweeps_max,
    )


def _h1_product(mesh: Mesh, a: np.ndarray, b: np.ndarray) -> complex:
    K = mesh.stiffness_matrix
    M = mesh.mass_matrix
    return complex(np.vdot(a, K @ b) + np.vdot(a, M @ b))


def h1_norm(u: GraphFunction) -> float:
    return math.sqrt(max(float(np.real(_h1_product(u.mesh, u.values, u.values))), 0.0))


def orbital_distance(u: GraphFunction, v: GraphFunction, n_grid: int = 256) -> float:
    """min over phases theta of the H1 distance || exp(i theta) u - v ||.

    Coarse scan over ``n_grid`` equispaced phases, then golden-section
    refinement of the best bracket.
    """
    if u.mesh is not v.mesh:
        raise EvolveError("orbital distance requires functions on the same mesh")
    mesh = u.mesh
    a = float(np.real(_h1_product(mesh, u.values, u.values)))
    b = float(np.real(_h1_product(mesh, v.values, v.values)))
    z = _h1_product(mesh, v.values, u.values)

    def dist_sq(theta: float) -> float:
        return a + b - 2.0 * (math.cos(theta) * z.real - math.sin(theta) * z.imag)

    thetas = np.linspace(0.0, 2.0 * math.pi, n_grid, endpoint=False)
    vals = [dist_sq(t) for t in thetas]
    k = int(np.argmin(vals))
    step = 2.0 * math.pi / n_grid
    lo, hi = thetas[k] - step, thetas[k] + step
    for _ in range(60):
        m1 = hi - GOLDEN * (hi - lo)
        m2 = lo + GOLDEN * (hi - lo)
        if dist_sq(m1) <= dist_sq(m2):
            hi = m2
        else:
            lo = m1
    best = dist_sq(0.5 * (lo + hi))
    return math.sqrt(max(best, 0.0))


def smoothed_perturbation(mesh: Mesh, seed: int = 0) -> np.ndarray:
    """Unit-H1-norm smooth random direction: white nodal noise passed twice
    through (K + M)^{-1}."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(mesh.ndof) + 1j * rng.standard_normal(mesh.ndof)
    smooth = splu((mesh.stiffness_matrix + mesh.mass_matrix).tocsc())
    v = smooth.solve(smooth.solve(raw.real)) + 1j * smooth.solve(smooth.solve(raw.imag))
    norm = math.sqrt(float(np.real(_h1_product(mesh, v, v))))
    return v / norm


@dataclass
class StabilityReport:
    times: np.ndarray
    orbital_distances: np.ndarray   # H1 distance to the phase orbit of the state
    mass_drift: float
    energy_drift: float
    epsilon: float

    @property
    def max_distance(self) -> float:
        return float(np.max(self.orbital_distances))

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "orbital_distances": self.orbital_distances.tolist(),
            "mass_drift": self.mass_drift,
            "energy_drift": self.energy_drift,
            "epsilon": self.epsilon,
            "max_distance": self.max_distance,
        }


def stability_probe(
    report,
    epsilon: float,
    t_final: float,
    dt: float,
    seed: int = 0,
    fp_tol: float = 1e-10,
    stride: int = 1,
    p: Optional[float] = None,
) -> StabilityReport:
    """Perturb a bound state by ``epsilon`` times a seeded smooth unit-H1
    direction, restore the mass, evolve, and record the orbital H1 distance
    back to the unperturbed state along the trajectory.

    ``report`` is a solve report (its minimizer is used) or a plain
    GraphFunction; ``stride`` thins the recorded distance samples.
    """
    state = report.minimizer if hasattr(report, "minimizer") else report
    mesh = state.mesh
    mu = fn.mass(state)
    pert = state.values.astype(complex)
    if epsilon != 0.0:
        pert = pert + epsilon * smoothed_perturbation(mesh, seed)
    gf = GraphFunction(mesh, pert)
    m = fn.mass(gf)
    if m <= 0:
        raise EvolveError("perturbed state lost all mass")
    gf.values = gf.values * math.sqrt(mu / m)

    times = [0.0]
    dists = [orbital_distance(gf, state)]
    counter = [0]

    def watch(t, u):
        counter[0] += 1
        if counter[0] % stride == 0:
            times.append(t)
            dists.append(orbital_distance(u, state))

    if p is None:
        if not hasattr(report, "p"):
            raise EvolveError("p must be given when probing a bare GraphFunction")
        p = report.p
    result = evolve(gf, p, t_final=t_final, dt=dt, fp_tol=fp_tol, callback=watch)
    return StabilityReport(
        times=np.array(times),
        orbital_distances=np.array(dists),
        mass_drift=result.mass_drift,
        energy_drift=result.energy_drift,
        epsilon=epsilon,
    )
