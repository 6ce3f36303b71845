"""Receivers, spectrograms, Lloyd-mirror theory and rotational diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import AssembledPotentialSystem, AssembledVelocitySystem
from .basis import lagrange_values
from .errors import ConfigurationError
from .mesh import Mesh
from .solver import PotentialState, TimeGrid, VelocityState
from .sources import SourceModel, bottom_forcing_vector

QUANTITIES = ("vertical_displacement", "vertical_velocity", "pressure_proxy")


@dataclass
class Receiver:
    """Point probe recording one quantity as a time series."""

    id: str
    x: float
    z: float
    quantity: str
    dt_record: float
    times: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ConfigurationError(
                f"receiver {self.id}: unknown quantity {self.quantity!r}"
            )

    def validate(self, mesh: Mesh):
        mesh.locate(self.x, self.z)  # raises if outside the water column

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.samples)


def _interp_vector_component(mesh: Mesh, vec: np.ndarray, comp: int,
                             x: float, z: float) -> float:
    n = mesh.n_nodes
    return mesh.interpolate(vec[comp * n:(comp + 1) * n], x, z)


def _pressure_nodal_potential(state: PotentialState, sys: AssembledPotentialSystem,
                              source: SourceModel, grid: TimeGrid,
                              n: int) -> np.ndarray:
    """-rho0 d2phi/dt2 at the nodes, read off the scheme's right-hand side.

    The phi update gives M_phi phi_tt = -(K_phi Phi + C Psi + M_b u_b), so
    the linearized pressure rho0 c0^2 (div U - (g/c0^2) U_z) = -rho0 phi_tt
    comes for free from the current level.
    """
    mesh = sys.mesh
    rhs = -(sys.K_phi @ state.Phi_curr) - sys.C_psiphi @ state.Psi_curr
    ub = bottom_forcing_vector(source, mesh, grid.time(n))
    rhs[mesh.bottom_nodes] -= sys.M_b * ub
    return -sys.coeffs.rho * (rhs / sys.M_phi)


def _pressure_at_point_velocity(state: VelocityState, sys: AssembledVelocitySystem,
                                mesh: Mesh, x: float, z: float) -> float:
    """rho0 c0^2 (div U - (g/c0^2) U_z) evaluated inside the element."""
    e, xi, eta = mesh.locate(x, z)
    lx = lagrange_values(mesh.rule_x.nodes, xi)
    lz = lagrange_values(mesh.rule_z.nodes, eta)
    dlx = _lagrange_derivs(mesh.rule_x.nodes, xi)
    dlz = _lagrange_derivs(mesh.rule_z.nodes, eta)
    conn = mesh.conn[e]
    n = mesh.n_nodes
    ux = state.U_curr[:n][conn].reshape(mesh.ni, mesh.nj)
    uz = state.U_curr[n:][conn].reshape(mesh.ni, mesh.nj)
    zloc = mesh.Z[conn].reshape(mesh.ni, mesh.nj)
    a = mesh.a
    z_xi = dlx @ zloc @ lz
    z_eta = lx @ zloc @ dlz
    dux_dxi = dlx @ ux @ lz
    dux_deta = lx @ ux @ dlz
    duz_deta = lx @ uz @ dlz
    div = (z_eta * dux_dxi - z_xi * dux_deta) / (a * z_eta) + duz_deta / z_eta
    uz_val = float(lx @ uz @ lz)
    co = sys.coeffs
    # coefficients vary in z only; interpolate their nodal samples
    rho = float(lx @ co.rho[conn].reshape(mesh.ni, mesh.nj) @ lz)
    c2 = float(lx @ (co.c[conn] ** 2).reshape(mesh.ni, mesh.nj) @ lz)
    return rho * c2 * float(div) - rho * co.g * uz_val


def _lagrange_derivs(nodes: np.ndarray, x: float) -> np.ndarray:
    """Derivatives of the nodal Lagrange basis at an arbitrary point."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    out = np.zeros(n)
    for i in range(n):
        denom = np.prod([nodes[i] - nodes[j] for j in range(n) if j != i])
        total = 0.0
        for m in range(n):
            if m == i:
                continue
            term = 1.0
            for j in range(n):
                if j != i and j != m:
                    term *= x - nodes[j]
            total += term
        out[i] = total / denom
    return out


def record(receivers, state, mesh: Mesh, n: int, grid: TimeGrid,
           sys=None, source: SourceModel | None = None):
    """Append the current value of each receiver's quantity."""
    t = grid.time(n)
    pressure_nodal = None
    for rec in receivers:
        if rec.quantity == "vertical_displacement":
            val = _interp_vector_component(mesh, state.displacement, 1, rec.x, rec.z)
        elif rec.quantity == "vertical_velocity":
            if isinstance(state, VelocityState):
                vel = state.U_curr
            else:
                vel = state.U_recovered
            val = _interp_vector_component(mesh, vel, 1, rec.x, rec.z)
        else:  # pressure_proxy
            if isinstance(state, PotentialState):
                if sys is None or source is None:
                    raise ConfigurationError(
                        "pressure recording needs the assembled system and source"
                    )
                if pressure_nodal is None:
                    pressure_nodal = _pressure_nodal_potential(
                        state, sys, source, grid, n
                    )
                val = mesh.interpolate(pressure_nodal, rec.x, rec.z)
            else:
                if sys is None:
                    raise ConfigurationError(
                        "pressure recording needs the assembled system"
                    )
                val = _pressure_at_point_velocity(state, sys, mesh, rec.x, rec.z)
        rec.times.append(t)
        rec.samples.append(float(val))
    return receivers


# ---------------------------------------------------------------------------
# spectral analysis
# ---------------------------------------------------------------------------

@dataclass
class Spectrogram:
    times: np.ndarray
    freqs: np.ndarray
    magnitude: np.ndarray  # (n_freqs, n_frames), >= 0
    window_len: int
    hop: int


def stft_spectrogram(samples, dt_record: float, window_len: int,
                     hop: int | None = None) -> Spectrogram:
    """Magnitude spectrogram with a Hann window.

    Frames start every ``hop`` samples (default 50% overlap); each frame is
    windowed and transformed, and the one-sided magnitude is returned.
    """
    x = np.asarray(samples, dtype=float)
    if hop is None:
        hop = window_len // 2
    if window_len < 4 or window_len > len(x) or hop < 1:
        raise ConfigurationError(
            f"degenerate STFT window: window_len={window_len}, hop={hop},"
            f" n_samples={len(x)}"
        )
    window = np.hanning(window_len)
    starts = np.arange(0, len(x) - window_len + 1, hop)
    mags = np.empty((window_len // 2 + 1, len(starts)))
    for k, s in enumerate(starts):
        mags[:, k] = np.abs(np.fft.rfft(x[s:s + window_len] * window))
    times = (starts + window_len / 2) * dt_record
    freqs = np.fft.rfftfreq(window_len, d=dt_record)
    return Spectrogram(times=times, freqs=freqs, magnitude=mags,
                       window_len=window_len, hop=hop)


def pool_spectrograms(specs) -> Spectrogram:
    """Concatenate peak-normalized frames of receivers sharing a geometry.

    The interference nulls of receivers at one depth line up in frequency,
    so pooling their frames sharpens the averaged spectrum the way reading
    several spectrogram panels together does.
    """
    if not specs:
        raise ConfigurationError("nothing to pool")
    freqs = specs[0].freqs
    for sp in specs[1:]:
        if len(sp.freqs) != len(freqs) or np.max(np.abs(sp.freqs - freqs)) > 0:
            raise ConfigurationError("pooled spectrograms must share the bins")
    mag = np.concatenate(
        [sp.magnitude / max(sp.magnitude.max(), 1e-300) for sp in specs],
        axis=1,
    )
    return Spectrogram(times=np.arange(mag.shape[1], dtype=float), freqs=freqs,
                       magnitude=mag, window_len=specs[0].window_len,
                       hop=specs[0].hop)


def averaged_spectrum(spec: Spectrogram, t_window=None):
    """Time average of the spectrogram magnitude over ``t_window``."""
    if t_window is None:
        sel = slice(None)
    else:
        t0, t1 = t_window
        sel = (spec.times >= t0) & (spec.times <= t1)
        if not np.any(sel):
            raise ConfigurationError("t_window selects no spectrogram frames")
    return spec.magnitude[:, sel].mean(axis=1)


def measure_bandwidth(spec: Spectrogram, t_window=None, band=None,
                      prominence: float = 0.4, envelope_width: float = 5.0):
    """Median spacing of interference minima in the averaged spectrum.

    The time-averaged magnitude is whitened in the log domain (a smooth
    baseline of width ``envelope_width`` Hz is subtracted) so that
    interference nulls stand out against the sloping response of the
    water column; minima with a log-prominence of at least ``prominence``
    (0.4 means dips about 33 percent deep) count as interference nulls.
    Returns None (a measurement failure, not an error) when fewer than two
    minima are found.
    """
    from scipy.ndimage import uniform_filter1d
    from scipy.signal import find_peaks

    s = averaged_spectrum(spec, t_window)
    f = spec.freqs
    if band is not None:
        keep = (f >= band[0]) & (f <= band[1])
        f, s = f[keep], s[keep]
    if len(s) < 5:
        return None
    log_s = np.log(np.maximum(s, 1e-12 * s.max()))
    df_bin = f[1] - f[0]
    width = max(int(round(envelope_width / df_bin)), 3)
    white = log_s - uniform_filter1d(log_s, width, mode="nearest")
    idx, _ = find_peaks(-white, prominence=prominence)
    if len(idx) < 2:
        return None
    return float(np.median(np.diff(f[idx])))


# ---------------------------------------------------------------------------
# Lloyd mirror theory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LloydGeometry:
    """Source depth, sound speed and declination angle of one receiver.

    ``sin_theta`` is taken directly; the scenario presets document the
    geometry mapping sin(theta) = receiver depth below surface / horizontal
    range (far-field approximation).
    """

    z_s: float
    c: float
    sin_theta: float

    def __post_init__(self):
        if self.z_s <= 0 or self.c <= 0:
            raise ConfigurationError("source depth and sound speed must be positive")
        if not (0.0 <= self.sin_theta <= 1.0):
            raise ConfigurationError("sin(theta) must lie in [0, 1]")

    @property
    def theta(self) -> float:
        return float(np.arcsin(self.sin_theta))


def lloyd_geometry(source_x: float, source_depth: float, receiver_x: float,
                   receiver_depth: float, c: float) -> LloydGeometry:
    """Geometry-to-angle mapping used by the landslide scenario."""
    r = abs(receiver_x - source_x)
    if r <= 0:
        raise ConfigurationError("receiver sits on top of the source")
    return LloydGeometry(z_s=source_depth, c=c,
                         sin_theta=min(receiver_depth / r, 1.0))


def lloyd_bandwidth(geom: LloydGeometry) -> float:
    """Interference bandwidth Delta f = c / (2 z_s sin(theta))."""
    if geom.sin_theta <= 0:
        raise ConfigurationError("grazing angle: bandwidth diverges")
    return geom.c / (2.0 * geom.z_s * geom.sin_theta)


def interference_minima(geom: LloydGeometry, k: float) -> np.ndarray:
    """sin(theta) of the pressure minima: (m-1) pi / (k z_s) while <= 1."""
    if k <= 0:
        raise ConfigurationError("wavenumber must be positive")
    step = np.pi / (k * geom.z_s)
    m_max = int(np.floor(1.0 / step + 1e-12)) + 1 if step <= 1.0 else 1
    return np.arange(m_max) * step


# ---------------------------------------------------------------------------
# rotational remainder
# ---------------------------------------------------------------------------

class RemainderField:
    """Velocity decomposition diagnostics with a running time average.

    U = -grad(phi) + U_r e_z with U_r = N (psi + (N/g) phi).  The ratio
    |U_r| / |U| is tracked per node; nodes where |U| falls below
    1e-14 x peak |U| are flagged undefined (NaN) for that sample.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        n = mesh.n_nodes
        self.U_r = np.zeros(n)
        self.grad_phi_mag = np.zeros(n)
        self.ratio = np.full(n, np.nan)
        self._ratio_sum = np.zeros(n)
        self._ratio_count = np.zeros(n)

    def update(self, state: PotentialState, sys: AssembledPotentialSystem):
        co = sys.coeffs
        n = self.mesh.n_nodes
        n_nodal = np.sqrt(co.n2)
        self.U_r = n_nodal * (state.Psi_curr + n_nodal / co.g * state.Phi_curr)
        u = state.U_recovered
        ux, uz = u[:n], u[n:]
        # U = -grad(phi) + U_r e_z at the averaged nodes, hence
        # grad(phi) = (-U_x, U_r - U_z)
        self.grad_phi_mag = np.hypot(ux, self.U_r - uz)
        speed = np.hypot(ux, uz)
        floor = 1e-14 * speed.max() if speed.max() > 0 else np.inf
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(speed > floor, np.abs(self.U_r) / speed, np.nan)
        self.ratio = ratio
        ok = np.isfinite(ratio)
        self._ratio_sum[ok] += ratio[ok]
        self._ratio_count[ok] += 1
        return self

    @property
    def ratio_time_average(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self._ratio_count > 0,
                            self._ratio_sum / self._ratio_count, np.nan)


def remainder_diagnostics(state: PotentialState, sys: AssembledPotentialSystem,
                          mesh: Mesh, accumulator: RemainderField | None = None
                          ) -> RemainderField:
    """Compute (and accumulate) the rotational-remainder diagnostics."""
    out = accumulator if accumulator is not None else RemainderField(mesh)
    return out.update(state, sys)
