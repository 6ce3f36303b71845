"""Leapfrog time integration of both assembled formulations.

Both systems are second order in time with diagonal mass matrices, so each
step is a few sparse products and diagonal solves.  The velocity scheme
enforces the seabed constraint through a Lagrange multiplier eliminated
against the diagonal C^T M^{-1} C; the potential scheme receives the seabed
forcing as Neumann data through the boundary mass.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import AssembledPotentialSystem, AssembledVelocitySystem
from .errors import ConfigurationError, DivergenceError
from .mesh import Mesh
from .sources import SourceModel, bottom_forcing_vector


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    steps: int

    def __post_init__(self):
        if self.dt <= 0 or self.steps < 1:
            raise ConfigurationError("time grid needs dt > 0 and steps >= 1")

    @property
    def T(self) -> float:
        return self.dt * self.steps

    def time(self, n: int) -> float:
        return n * self.dt


@dataclass
class VelocityState:
    U_prev: np.ndarray
    U_curr: np.ndarray
    Lambda: np.ndarray
    displacement: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, sys: AssembledVelocitySystem):
        n = sys.n_dofs
        return cls(np.zeros(n), np.zeros(n), np.zeros(sys.C_h.shape[1]), np.zeros(n))

    def velocity_pair(self):
        return self.U_prev, self.U_curr


@dataclass
class PotentialState:
    Phi_prev: np.ndarray
    Phi_curr: np.ndarray
    Psi_prev: np.ndarray
    Psi_curr: np.ndarray
    U_recovered: np.ndarray
    U_recovered_prev: np.ndarray
    displacement: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, sys: AssembledPotentialSystem):
        n = sys.n_dofs
        nv = sys.M_U.shape[0]
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n),
                   np.zeros(nv), np.zeros(nv), np.zeros(nv))

    def velocity_pair(self):
        return self.U_recovered_prev, self.U_recovered


@dataclass
class SpongeLayer:
    """Exponential damping of field increments near the lateral boundaries.

    sigma ramps as a cubic from zero at the interior edge of each layer to
    ``strength`` at the domain boundary; outside the layers it is zero.
    """

    thickness: float
    strength: float

    def __post_init__(self):
        if self.thickness <= 0 or self.strength < 0:
            raise ConfigurationError("sponge needs thickness > 0, strength >= 0")

    def sigma_1d(self, x: np.ndarray, x_min: float, x_max: float) -> np.ndarray:
        if 2 * self.thickness >= (x_max - x_min):
            raise ConfigurationError("sponge layers overlap: domain too narrow")
        left = np.clip((x_min + self.thickness - x) / self.thickness, 0.0, 1.0)
        right = np.clip((x - (x_max - self.thickness)) / self.thickness, 0.0, 1.0)
        return self.strength * (left**3 + right**3)

    def damping(self, mesh: Mesh, dt: float) -> np.ndarray:
        """Per-scalar-node factor exp(-sigma dt)."""
        sigma = self.sigma_1d(mesh.X, mesh.domain.x_min, mesh.domain.x_max)
        return np.exp(-sigma * dt)


@dataclass
class EnergyTrace:
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def append(self, t: float, e: float):
        self.times.append(t)
        self.energy.append(e)

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.energy)


def leapfrog_update(M: np.ndarray, x_prev: np.ndarray, x_curr: np.ndarray,
                    rhs: np.ndarray, dt: float) -> np.ndarray:
    """x^{n+1} = 2 x^n - x^{n-1} + dt^2 M^{-1} rhs with diagonal M."""
    return 2.0 * x_curr - x_prev + dt * dt * (rhs / M)


def _check_finite(x: np.ndarray, step: int):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(step)


def step_velocity(state: VelocityState, sys: AssembledVelocitySystem,
                  source: SourceModel, grid: TimeGrid, n: int) -> VelocityState:
    """Advance U from levels (n-1, n) to n+1, enforcing the seabed constraint.

    The multiplier solves the diagonal system
    (C^T M^{-1} C) Lambda = [C^T U* - U_b((n+1) dt)] / dt^2
    so that C^T U^{n+1} matches the boundary datum exactly.
    """
    dt = grid.dt
    u_star = leapfrog_update(sys.M_U, state.U_prev, state.U_curr,
                             -(sys.K_U @ state.U_curr), dt)
    ub = bottom_forcing_vector(source, sys.mesh, grid.time(n + 1))
    datum = sys.M_b * ub
    defect = sys.C_h.T @ u_star - datum
    lam_scaled = defect / sys.S_lambda
    u_next = u_star - (sys.C_h @ lam_scaled) / sys.M_U
    _check_finite(u_next, n + 1)

    state.Lambda = lam_scaled / (dt * dt)
    state.U_prev = state.U_curr
    state.U_curr = u_next
    state.step = n + 1
    return state


def step_potential(state: PotentialState, sys: AssembledPotentialSystem,
                   source: SourceModel, grid: TimeGrid, n: int) -> PotentialState:
    """Advance (Phi, Psi) one leapfrog step; forcing enters at time n dt."""
    dt = grid.dt
    mesh = sys.mesh
    rhs_phi = -(sys.K_phi @ state.Phi_curr) - sys.C_psiphi @ state.Psi_curr
    ub = bottom_forcing_vector(source, mesh, grid.time(n))
    rhs_phi[mesh.bottom_nodes] -= sys.M_b * ub
    phi_next = leapfrog_update(sys.M_phi, state.Phi_prev, state.Phi_curr,
                               rhs_phi, dt)

    rhs_psi = -(sys.K_psi * state.Psi_curr) - sys.C_psiphi.T @ state.Phi_curr
    psi_next = leapfrog_update(sys.M_psi, state.Psi_prev, state.Psi_curr,
                               rhs_psi, dt)
    _check_finite(phi_next, n + 1)

    state.Phi_prev, state.Phi_curr = state.Phi_curr, phi_next
    state.Psi_prev, state.Psi_curr = state.Psi_curr, psi_next
    state.step = n + 1
    return state


def recover_velocity(state: PotentialState,
                     sys: AssembledPotentialSystem) -> np.ndarray:
    """Nodal velocity from the potentials: U = M_U^{-1}(B_phi Phi + B_psi Psi)."""
    u = (sys.B_phi @ state.Phi_curr + sys.B_psi @ state.Psi_curr) / sys.M_U
    state.U_recovered_prev = state.U_recovered
    state.U_recovered = u
    return u


def accumulate_displacement(state, grid: TimeGrid) -> np.ndarray:
    """Trapezoidal displacement update from the state's velocity pair."""
    u_old, u_new = state.velocity_pair()
    state.displacement = state.displacement + 0.5 * grid.dt * (u_old + u_new)
    return state.displacement


def apply_sponge(state, damping: np.ndarray):
    """Damp the last increment nodewise: x <- x_prev + damp (x - x_prev).

    ``damping`` holds one factor per scalar node; vector states tile it over
    both components.
    """
    if isinstance(state, VelocityState):
        d = np.concatenate([damping, damping])
        state.U_curr = state.U_prev + d * (state.U_curr - state.U_prev)
    elif isinstance(state, PotentialState):
        state.Phi_curr = state.Phi_prev + damping * (state.Phi_curr - state.Phi_prev)
        state.Psi_curr = state.Psi_prev + damping * (state.Psi_curr - state.Psi_prev)
    else:
        raise ConfigurationError(f"unsupported state type {type(state)!r}")
    return state


def discrete_energy(state, sys, grid: TimeGrid) -> float:
    """Leapfrog-consistent energy E^{n+1/2} from two consecutive levels.

    E = 1/2 ||(x^{n+1} - x^n)/dt||_M^2 + 1/2 (x^{n+1})^T K x^n, which is
    conserved exactly by the scheme once the forcing vanishes.
    """
    dt = grid.dt
    if isinstance(state, VelocityState):
        v = (state.U_curr - state.U_prev) / dt
        kin = 0.5 * float(v @ (sys.M_U * v))
        pot = 0.5 * float(state.U_curr @ (sys.K_U @ state.U_prev))
        return kin + pot
    if isinstance(state, PotentialState):
        vphi = (state.Phi_curr - state.Phi_prev) / dt
        vpsi = (state.Psi_curr - state.Psi_prev) / dt
        kin = 0.5 * (float(vphi @ (sys.M_phi * vphi))
                     + float(vpsi @ (sys.M_psi * vpsi)))
        k_phi = sys.K_phi @ state.Phi_prev + sys.C_psiphi @ state.Psi_prev
        k_psi = sys.K_psi * state.Psi_prev + sys.C_psiphi.T @ state.Phi_prev
        pot = 0.5 * (float(state.Phi_curr @ k_phi) + float(state.Psi_curr @ k_psi))
        return kin + pot
    raise ConfigurationError(f"unsupported state type {type(state)!r}")
