"""Background ocean state: density, sound speed and buoyancy frequency.

The vertical coordinate z is measured upward from the seabed reference
level z = 0; the free surface sits at z = H.  A stable stratification must
satisfy N^2(z) = -(g/rho0) drho0/dz - g^2/c0^2 >= 0, otherwise the fluid
is denser above than below and the equilibrium is unstable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, NumericError, StratificationError

N2_FLOOR = -1e-12  # tolerated negative rounding noise in N^2


@dataclass(frozen=True)
class PhysicalConstants:
    g: float = 9.81  # gravity, m/s^2
    p_atm: float = 101325.0  # surface atmospheric pressure, Pa

    def __post_init__(self):
        if self.g <= 0:
            raise ConfigurationError("gravity must be positive")


@dataclass(frozen=True)
class EquationOfState:
    """Simplified two-parameter equation of state.

    linear_compressibility:
        rho = rho_ref * (1 - alpha_T (T - T_ref) + kappa (p - p_atm)),
        c^2 = 1 / (rho kappa).
    incompressible:
        rho = rho_ref * (1 - alpha_T (T - T_ref)), with a fixed nominal
        sound speed c_ref used for the wave operator.
    """

    kind: str = "linear_compressibility"
    rho_ref: float = 1000.0
    alpha_T: float = 2.0e-4  # thermal expansion, 1/K
    kappa: float = 4.5e-10  # compressibility, 1/Pa
    T_ref: float = 283.15  # K
    c_ref: float = 1500.0  # nominal sound speed for the incompressible kind

    def __post_init__(self):
        if self.kind not in ("incompressible", "linear_compressibility"):
            raise ConfigurationError(f"unknown equation of state kind {self.kind!r}")
        if self.kappa < 0:
            raise ConfigurationError("compressibility must be >= 0")

    def density(self, p, T, consts: PhysicalConstants):
        dT = np.asarray(T, dtype=float) - self.T_ref
        if self.kind == "incompressible":
            return self.rho_ref * (1.0 - self.alpha_T * dT)
        dp = np.asarray(p, dtype=float) - consts.p_atm
        return self.rho_ref * (1.0 - self.alpha_T * dT + self.kappa * dp)

    def sound_speed(self, rho):
        # referenced to rho_ref so that an isothermal column is exactly
        # neutral (N^2 = 0) under this equation of state
        rho = np.asarray(rho, dtype=float)
        if self.kind == "incompressible":
            return np.full_like(rho, self.c_ref)
        return np.full_like(rho, 1.0 / np.sqrt(self.rho_ref * self.kappa))


class StratificationProfile:
    """Sampled rho0(z), c0(z), N^2(z) with cubic interpolation.

    Profiles are immutable after construction and can be evaluated at any
    z in [0, H] (e.g. the terrain-following mesh nodes).
    """

    def __init__(self, z_grid, rho0, c0, N2, consts: PhysicalConstants | None = None,
                 rho_bounds=(100.0, 2000.0), c_bounds=(100.0, 3000.0),
                 check_consistency=True):
        self.z = np.asarray(z_grid, dtype=float)
        self.rho0 = np.asarray(rho0, dtype=float)
        self.c0 = np.asarray(c0, dtype=float)
        self.N2 = np.asarray(N2, dtype=float)
        self.consts = consts or PhysicalConstants()
        if self.z.ndim != 1 or np.any(np.diff(self.z) <= 0):
            raise ConfigurationError("z grid must be strictly increasing")
        for name, arr in (("rho0", self.rho0), ("c0", self.c0), ("N2", self.N2)):
            if arr.shape != self.z.shape:
                raise ConfigurationError(f"{name} must match the z grid shape")
        lo, hi = rho_bounds
        if np.any(self.rho0 < lo) or np.any(self.rho0 > hi):
            raise ConfigurationError(
                f"rho0 outside declared bounds [{lo}, {hi}]:"
                f" range [{self.rho0.min():.6g}, {self.rho0.max():.6g}]"
            )
        lo, hi = c_bounds
        if np.any(self.c0 < lo) or np.any(self.c0 > hi):
            raise ConfigurationError(
                f"c0 outside declared bounds [{lo}, {hi}]:"
                f" range [{self.c0.min():.6g}, {self.c0.max():.6g}]"
            )
        if np.any(self.N2 < N2_FLOOR):
            raise StratificationError(
                f"N^2 reaches {self.N2.min():.6g} < 0: unstable stratification"
            )
        self._rho_spline = CubicSpline(self.z, self.rho0)
        self._c_spline = CubicSpline(self.z, self.c0)
        self._n2_spline = CubicSpline(self.z, self.N2)
        if check_consistency:
            self._check_buoyancy_consistency()

    def _check_buoyancy_consistency(self):
        g = self.consts.g
        n2 = -(g / self.rho0) * self._rho_spline(self.z, 1) - g**2 / self.c0**2
        scale = max(np.max(np.abs(self.N2)), g**2 / np.min(self.c0) ** 2)
        err = np.max(np.abs(n2 - self.N2)) / scale
        if err > 1e-6:
            raise ConfigurationError(
                f"N^2 inconsistent with rho0, c0 (relative error {err:.3g})"
            )

    @property
    def H(self) -> float:
        return float(self.z[-1])

    def rho(self, z):
        return self._rho_spline(z)

    def c(self, z):
        return self._c_spline(z)

    def n2(self, z):
        return self._n2_spline(z)

    def n(self, z):
        return np.sqrt(np.maximum(self._n2_spline(z), 0.0))


def constant_N_profile(rho_ref: float, c0: float, N: float, H: float,
                       consts: PhysicalConstants | None = None,
                       n_samples: int = 201) -> StratificationProfile:
    """Profile with constant buoyancy frequency N and sound speed c0.

    The density then decays exponentially upward,
    rho0(z) = rho_ref exp(-n^2 z) with n^2 = N^2/g + g/c0^2, where rho_ref
    is the density at the reference level z = 0 (the seabed).
    """
    if rho_ref <= 0 or c0 <= 0:
        raise ConfigurationError("rho_ref and c0 must be positive")
    if N < 0:
        raise ConfigurationError("N must be >= 0")
    consts = consts or PhysicalConstants()
    n2_coef = N**2 / consts.g + consts.g / c0**2
    z = np.linspace(0.0, H, n_samples)
    rho0 = rho_ref * np.exp(-n2_coef * z)
    return StratificationProfile(
        z, rho0, np.full_like(z, c0), np.full_like(z, N**2), consts
    )


def brunt_vaisala(z_grid, rho0, c0, consts: PhysicalConstants | None = None):
    """N^2 samples from density and sound speed samples.

    The density derivative is taken from the cubic interpolant.  Raises
    StratificationError when N^2 < 0 beyond rounding noise.
    """
    consts = consts or PhysicalConstants()
    z = np.asarray(z_grid, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    c0 = np.asarray(c0, dtype=float)
    if np.any(rho0 <= 0):
        raise ConfigurationError("rho0 must be strictly positive")
    drho = CubicSpline(z, rho0)(z, 1)
    n2 = -(consts.g / rho0) * drho - consts.g**2 / c0**2
    if np.any(n2 < N2_FLOOR):
        raise StratificationError(
            f"N^2 reaches {n2.min():.6g} < 0: denser fluid above lighter"
        )
    return n2


def hydrostatic_pressure(z_grid, T, eos: EquationOfState, H: float,
                         consts: PhysicalConstants | None = None,
                         max_step: float = 1.0):
    """Integrate dp/dz = -g f_rho(p, T(z)) down from p(H) = p_atm.

    Classic RK4 at a fixed step <= max_step; returns (z, p) with z
    increasing from the seabed.
    """
    consts = consts or PhysicalConstants()
    z_in = np.asarray(z_grid, dtype=float)
    T_in = np.asarray(T, dtype=float)
    if z_in[0] > 0.0 or z_in[-1] < H:
        raise ConfigurationError("temperature profile must cover [0, H]")
    T_spline = CubicSpline(z_in, T_in)

    n_steps = max(int(np.ceil(H / max_step)), 4)
    z = np.linspace(H, 0.0, n_steps + 1)  # integrate downward
    h = z[1] - z[0]  # negative
    p = np.empty_like(z)
    p[0] = consts.p_atm

    def dpdz(zv, pv):
        rho = eos.density(pv, T_spline(zv), consts)
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise NumericError(f"equation of state returned rho={rho} at z={zv}")
        return -consts.g * rho

    for i in range(n_steps):
        k1 = dpdz(z[i], p[i])
        k2 = dpdz(z[i] + h / 2, p[i] + h * k1 / 2)
        k3 = dpdz(z[i] + h / 2, p[i] + h * k2 / 2)
        k4 = dpdz(z[i] + h, p[i] + h * k3)
        p[i + 1] = p[i] + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return z[::-1], p[::-1], T_spline


def profile_from_temperature(z_grid, T, eos: EquationOfState, H: float,
                             consts: PhysicalConstants | None = None,
                             max_step: float = 1.0) -> StratificationProfile:
    """Background state from a temperature profile via hydrostatic balance.

    The pressure comes from :func:`hydrostatic_pressure`; the equation of
    state then gives rho0, its sound-speed closure gives c0, and N^2
    follows from the buoyancy formula (rejecting unstable profiles).
    """
    consts = consts or PhysicalConstants()
    z, p, T_spline = hydrostatic_pressure(z_grid, T, eos, H, consts, max_step)
    rho0 = eos.density(p, T_spline(z), consts)
    c0 = eos.sound_speed(rho0)
    n2 = brunt_vaisala(z, rho0, c0, consts)
    return StratificationProfile(z, rho0, c0, n2, consts)


def load_temperature_file(path):
    """Two-column text file: z (meters above the seabed), T (kelvin)."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigurationError(f"{path}: expected two columns (z, T)")
    z, T = data[:, 0], data[:, 1]
    if np.any(np.diff(z) <= 0):
        raise ConfigurationError(f"{path}: z column must be strictly increasing")
    return z, T
