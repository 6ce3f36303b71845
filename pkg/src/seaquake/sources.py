"""Separable seabed forcing models u_b(x, t) = f(x) g(t).

u_b is the prescribed normal-trace datum on the seabed: positive values push
the water along the outward normal (downward at a flat bed).  Spatial shapes
cover the three scenarios: a smoothed rectangle (earthquake uplift zone), the
derivative of a Gaussian (dipolar uplift/subsidence) and a narrow Gaussian
(landslide emitter).  Temporal shapes: smoothed rectangle, Ricker wavelet and
band-limited noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .mesh import Mesh, _sigmoid


@dataclass(frozen=True)
class SpatialShape:
    """Spatial factor f(x).

    kind = smoothed_rect:       f = sig(s_x (x-x0+r_x/2)) - sig(s_x (x-x0-r_x/2))
    kind = gaussian_derivative: f = -2 a s_x (x-x0) exp(-(x-x0)^2 s_x), s_x in 1/m^2
    kind = gaussian:            f = a exp(-s_x^2 (x-x0)^2), s_x in 1/m
    """

    kind: str
    s_x: float
    x_0: float = 0.0
    r_x: float = 0.0
    a: float = 1.0

    def __post_init__(self):
        if self.kind not in ("smoothed_rect", "gaussian_derivative", "gaussian"):
            raise ConfigurationError(f"unknown spatial shape {self.kind!r}")
        if not np.isfinite(self.a):
            raise ConfigurationError("amplitude must be finite")
        if self.s_x <= 0:
            raise ConfigurationError("spatial width parameter must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = x - self.x_0
        if self.kind == "smoothed_rect":
            return self.a * (
                _sigmoid(self.s_x * (s + self.r_x / 2))
                - _sigmoid(self.s_x * (s - self.r_x / 2))
            )
        if self.kind == "gaussian_derivative":
            return -2.0 * self.a * self.s_x * s * np.exp(-(s**2) * self.s_x)
        return self.a * np.exp(-(self.s_x**2) * s**2)


@dataclass(frozen=True)
class TemporalShape:
    """Temporal factor g(t).

    kind = smoothed_rect: g = sig(s_t (t-t0)) - sig(s_t (t-t0-r_t)), s_t in 1/s
    kind = ricker:        g = (4 s_t^2 (t-t0)^2 - 2 s_t) exp(-(t-t0)^2 s_t),
                          s_t in 1/s^2
    kind = bandlimited_noise: frequency-domain synthesis on [0, f_max],
                          linearly interpolated samples, cosine onset ramp
    """

    kind: str
    s_t: float = 0.0
    t_0: float = 0.0
    r_t: float = 0.0
    f_max: float = 0.0
    seed: int = 0
    duration: float = 0.0
    ramp: float = 1.0
    _samples: np.ndarray | None = field(default=None, repr=False, compare=False)
    _dt: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.kind not in ("smoothed_rect", "ricker", "bandlimited_noise"):
            raise ConfigurationError(f"unknown temporal shape {self.kind!r}")
        if self.kind == "bandlimited_noise":
            if self.f_max <= 0 or self.duration <= 0:
                raise ConfigurationError("noise needs positive f_max and duration")
            dt = 1.0 / (40.0 * self.f_max)  # >= 40 samples per period of f_max
            samples = bandlimited_noise(self.f_max, self.duration, dt, self.seed)
            t = np.arange(len(samples)) * dt
            # sin^4 onset ramp: O(t^4) near zero, so the discrete initial
            # data vanish to far below solver tolerances
            taper = np.where(
                t < self.ramp, np.sin(0.5 * np.pi * np.minimum(t / self.ramp, 1.0)) ** 4,
                1.0,
            )
            object.__setattr__(self, "_samples", samples * taper)
            object.__setattr__(self, "_dt", dt)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "smoothed_rect":
            return _sigmoid(self.s_t * (t - self.t_0)) - _sigmoid(
                self.s_t * (t - self.t_0 - self.r_t)
            )
        if self.kind == "ricker":
            u = t - self.t_0
            return (4.0 * self.s_t**2 * u**2 - 2.0 * self.s_t) * np.exp(
                -(u**2) * self.s_t
            )
        if np.any(t < -1e-12) or np.any(t > self.duration + 1e-12):
            raise ConfigurationError(
                f"noise source evaluated outside [0, {self.duration}] s"
            )
        return np.interp(t, np.arange(len(self._samples)) * self._dt, self._samples)


def bandlimited_noise(f_max: float, duration: float, dt_sample: float,
                      seed: int) -> np.ndarray:
    """Reproducible noise with a hard spectral cutoff at f_max.

    Synthesized in the frequency domain: uniform magnitude with random
    phases on (0, f_max], zero above and at DC, inverse transform,
    normalized to unit peak.
    """
    if f_max >= 0.5 / dt_sample:
        raise ConfigurationError(
            f"f_max = {f_max} Hz violates Nyquist for dt = {dt_sample} s"
        )
    n = int(round(duration / dt_sample)) + 1
    freqs = np.fft.rfftfreq(n, d=dt_sample)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(freqs))
    spectrum = np.where((freqs > 0) & (freqs <= f_max), np.exp(1j * phases), 0.0)
    x = np.fft.irfft(spectrum, n=n)
    return x / np.max(np.abs(x))


@dataclass(frozen=True)
class SourceModel:
    spatial: SpatialShape
    temporal: TemporalShape

    def u_b(self, x, t):
        return self.spatial(x) * self.temporal(t)


def bottom_forcing_vector(source: SourceModel, mesh: Mesh, t: float) -> np.ndarray:
    """u_b sampled at the bottom-boundary nodes (one value per node)."""
    return np.asarray(source.spatial(mesh.x_nodes_1d) * source.temporal(t))
