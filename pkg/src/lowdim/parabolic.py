"""Theta-scheme time stepping for the weak heat problem on a structure."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import FemSystem

MEAN_TOL = 1e-11


def energy(K, u):
    """u^T K u, the discrete energy functional."""
    u = getattr(u, "values", u)
    return float(u @ (K @ u))


def step_theta(M, K, u, F_n, F_np1, dt, theta=1.0, solver=None):
    """One step of (M + theta dt K) u+ = (M - (1-theta) dt K) u + dt (theta F+ + (1-theta) F).

    ``F_n``/``F_np1`` are load vectors (already tested against the basis), so a
    nodal forcing field f enters as ``M @ f``.
    """
    u = getattr(u, "values", u)
    rhs = M @ u - (1.0 - theta) * dt * (K @ u)
    if F_n is not None:
        rhs = rhs + dt * (theta * np.asarray(F_np1) + (1.0 - theta) * np.asarray(F_n))
    if solver is None:
        solver = spla.factorized((M + theta * dt * K).tocsc())
    return solver(rhs)


@dataclass
class ParabolicProblem:
    system: FemSystem
    u0: np.ndarray
    T: float
    dt: float
    theta: float = 1.0
    load: Optional[Callable[[float], np.ndarray]] = None  # t -> load vector

    def __post_init__(self):
        self.u0 = np.asarray(getattr(self.u0, "values", self.u0), dtype=float)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        C = self.system.constraint_matrix()
        means = (C @ self.u0) / np.asarray(self.system.dofmap.group_measures)
        if np.abs(means).max() > MEAN_TOL:
            raise ValueError(f"initial datum has nonzero group means {means.tolist()}")

    @property
    def n_steps(self):
        return int(math.ceil(self.T / self.dt - 1e-9))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_steps + 1, n_dofs)
    energies: np.ndarray

    def __len__(self):
        return len(self.times)

    def m_norms(self, M):
        return np.sqrt(np.maximum(np.einsum("ni,ni->n", self.states, (M @ self.states.T).T), 0.0))


def solve_parabolic(p):
    """March the theta-scheme from u0 over [0, T] with one factorisation."""
    sysm = p.system
    n = p.n_steps
    solver = spla.factorized((sysm.M + p.theta * p.dt * sysm.K).tocsc())
    times = p.dt * np.arange(n + 1)
    states = np.empty((n + 1, sysm.n_dofs))
    states[0] = p.u0
    F_prev = p.load(0.0) if p.load else None
    for k in range(n):
        F_next = p.load(times[k + 1]) if p.load else None
        states[k + 1] = step_theta(sysm.M, sysm.K, states[k], F_prev, F_next, p.dt, p.theta, solver)
        F_prev = F_next
    energies = np.einsum("ni,ni->n", states, (sysm.K @ states.T).T)
    return Trajectory(times, states, energies)


def constant_load(system, f):
    """Time-independent load from per-component frame functions."""
    F = system.load(f).values
    return lambda t: F


@dataclass
class AsymptoticReport:
    distances: np.ndarray
    energies: np.ndarray
    monotone: bool
    final_energy: float
    tol: float

    @property
    def passed(self):
        return self.monotone and self.final_energy < self.tol


def asymptotic_check(traj, u_star, system, tol=1e-8, slack=1e-12):
    """Distances ||u_n - u*||_M and energies E(u_n - u*) along a trajectory."""
    u_star = np.asarray(getattr(u_star, "values", u_star))
    if u_star.shape != traj.states.shape[1:]:
        raise ValueError("stationary field and trajectory use different dof maps")
    diff = traj.states - u_star[None, :]
    d = np.sqrt(np.maximum(np.einsum("ni,ni->n", diff, (system.M @ diff.T).T), 0.0))
    e = np.einsum("ni,ni->n", diff, (system.K @ diff.T).T)
    monotone = bool(np.all(np.diff(d) <= slack))
    return AsymptoticReport(d, e, monotone, float(e[-1]), tol)
