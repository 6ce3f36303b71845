"""Self-contained verification suite behind the ``verify`` CLI verb.

Runs the core correctness properties on small meshes: the discrete Green
identity, leapfrog energy conservation after the source decays, the
barotropic decoupling of the second potential, and the documented example
values of every module.  Each check prints one pass/fail line; the suite
needs no test framework and finishes in a few minutes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analysis import (LloydGeometry, interference_minima, lloyd_bandwidth,
                       measure_bandwidth, stft_spectrogram)
from .assembly import (assemble_potential, assemble_velocity,
                       green_identity_residual, stable_dt)
from .basis import diff_matrix, gll_rule
from .errors import StratificationError
from .mesh import DiscretizationSpec, DomainSpec, TopographySpec, build_mesh
from .scenario import preset, replace
from .solver import (PotentialState, TimeGrid, discrete_energy,
                     recover_velocity, step_potential, step_velocity,
                     VelocityState)
from .sources import SpatialShape, TemporalShape, bandlimited_noise
from .stratification import (EquationOfState, PhysicalConstants,
                             brunt_vaisala, constant_N_profile,
                             profile_from_temperature)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _run(checks, verbose=True):
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            detail = fn() or ""
            ok = True
        except AssertionError as exc:
            detail, ok = str(exc), False
        except Exception as exc:  # present unexpected failures, don't mask them
            detail, ok = f"{type(exc).__name__}: {exc}", False
        dt = time.perf_counter() - t0
        results.append(CheckResult(name, ok, detail, dt))
        if verbose:
            status = "PASS" if ok else "FAIL"
            extra = f"  ({detail})" if detail else ""
            print(f"[{status}] {name} [{dt:.2f}s]{extra}")
    return results


# -- individual checks ------------------------------------------------------

def check_green_identity():
    """Criterion 1: discrete Green identity on meshes up to 8x4, orders to 6."""
    prof = constant_N_profile(1000.0, 1500.0, 1e-3, 1500.0)
    worst = 0.0
    cases = [
        (2, 2, 2, 2, "flat"),
        (4, 2, 4, 3, "flat"),
        (8, 4, 6, 6, "flat"),
        (5, 3, 5, 4, "bumps"),
    ]
    for nx, nz, px, pz, topo in cases:
        if topo == "flat":
            t = TopographySpec(kind="flat")
        else:
            t = TopographySpec(kind="bumps", b=300.0, k_x=0.002, f_x=0.01,
                               r_x=4000.0, x_c=5000.0)
        mesh = build_mesh(DomainSpec(0.0, 10000.0, 1500.0, t),
                          DiscretizationSpec(nx, nz, px, pz))
        vel = assemble_velocity(mesh, prof)
        pot = assemble_potential(mesh, prof)
        res = green_identity_residual(vel, pot, mesh, trials=100, seed=7)
        worst = max(worst, res)
    assert worst < 1e-10, f"green identity residual {worst:.3e} >= 1e-10"
    return f"max residual {worst:.3e}"


def check_energy_conservation(steps_after=2000):
    """Criterion 2: energy constant after the Ricker source decays."""
    cfg = replace(preset("sim2_energy"), nx=30, nz=4)
    mesh = cfg.build_mesh()
    profile = cfg.build_profile()
    source = cfg.build_source()
    decay_t = cfg.source_t0 + 5.0 / np.sqrt(cfg.source_st)
    details = []
    for formulation in ("velocity", "potential"):
        if formulation == "velocity":
            sys = assemble_velocity(mesh, profile)
            dt = stable_dt(sys.M_U, sys.K_U, cfg.cfl_safety)
            state = VelocityState.zeros(sys)
        else:
            sys = assemble_potential(mesh, profile)
            import scipy.sparse as sp
            k_full = sp.bmat([[sys.K_phi, sys.C_psiphi],
                              [sys.C_psiphi.T, sp.diags(sys.K_psi)]]).tocsr()
            dt = stable_dt(np.concatenate([sys.M_phi, sys.M_psi]), k_full,
                           cfg.cfl_safety)
            state = PotentialState.zeros(sys)
        n_decay = int(np.ceil(decay_t / dt)) + 2
        grid = TimeGrid(dt=dt, steps=n_decay + steps_after)
        energies = []
        for n in range(grid.steps):
            if formulation == "velocity":
                step_velocity(state, sys, source, grid, n)
            else:
                step_potential(state, sys, source, grid, n)
            if n + 1 >= n_decay:
                energies.append(discrete_energy(state, sys, grid))
        energies = np.asarray(energies)
        drift = float((energies.max() - energies.min()) / energies.max())
        assert drift < 1e-8, (
            f"{formulation}: relative energy drift {drift:.3e} >= 1e-8"
        )
        details.append(f"{formulation} drift {drift:.1e}")
    return "; ".join(details)


def check_barotropic_reduction():
    """Criterion 5: N = 0 keeps psi at machine zero relative to phi."""
    cfg = replace(preset("sim2"), n_buoyancy=0.0, nx=20, nz=4, duration=6.0,
                  sponge_enabled=False, remainder=False)
    mesh = cfg.build_mesh()
    sys = assemble_potential(mesh, cfg.build_profile())
    source = cfg.build_source()
    import scipy.sparse as sp
    k_full = sp.bmat([[sys.K_phi, sys.C_psiphi],
                      [sys.C_psiphi.T, sp.diags(sys.K_psi)]]).tocsr()
    dt = stable_dt(np.concatenate([sys.M_phi, sys.M_psi]), k_full, 0.9)
    grid = TimeGrid(dt=dt, steps=int(cfg.duration / dt))
    state = PotentialState.zeros(sys)
    worst = 0.0
    for n in range(grid.steps):
        step_potential(state, sys, source, grid, n)
        phi_norm = np.linalg.norm(state.Phi_curr)
        if phi_norm > 0:
            worst = max(worst, np.linalg.norm(state.Psi_curr) / phi_norm)
    assert worst < 1e-12, f"||psi||/||phi|| reached {worst:.3e} >= 1e-12"
    return f"max ||psi||/||phi|| = {worst:.3e}"


def check_basis_examples():
    r1 = gll_rule(1)
    assert np.allclose(r1.nodes, [-1, 1]) and np.allclose(r1.weights, [1, 1])
    r2 = gll_rule(2)
    assert np.allclose(r2.nodes, [-1, 0, 1], atol=1e-14)
    assert np.allclose(r2.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-14)
    for p in range(1, 13):
        r = gll_rule(p)
        assert abs(r.weights.sum() - 2.0) < 1e-13, f"order {p} weight sum"
    d1 = diff_matrix(r1)
    assert np.allclose(d1.entries, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-14)
    d4 = diff_matrix(gll_rule(4))
    x = gll_rule(4).nodes
    assert np.max(np.abs(d4.entries @ x**2 - 2 * x)) < 1e-11
    return "quadrature and differentiation tables reproduced"


def check_mesh_examples():
    dom = DomainSpec(0.0, 101000.0, 1500.0, TopographySpec(kind="flat"))
    mesh = build_mesh(dom, DiscretizationSpec(2, 1, 1, 1))
    assert mesh.n_elements == 2 and mesh.n_nodes == 6
    assert abs(mesh.area() - 101000.0 * 1500.0) < 1e-6 * 101000 * 1500
    big = build_mesh(dom, DiscretizationSpec(20, 10, 4, 5))
    assert big.n_nodes == (20 * 4 + 1) * (10 * 5 + 1)
    topo = TopographySpec(kind="bumps", b=300.0, k_x=0.03, f_x=0.07,
                          r_x=1500.0, x_c=7500.0)
    curved = build_mesh(DomainSpec(0.0, 15000.0, 1500.0, topo),
                        DiscretizationSpec(30, 4, 4, 4))
    assert np.min(curved.detJ) > 0
    return "node counts, area and curved Jacobians verified"


def check_stratification_examples():
    consts = PhysicalConstants()
    n2 = 1e-6 / 9.81 + 9.81 / 1500.0**2
    assert abs(n2 - 4.4619e-6) < 1e-9
    prof = constant_N_profile(1000.0, 1500.0, 1e-3, 1500.0)
    assert abs(prof.rho(1500.0) - 1000.0 * np.exp(-n2 * 1500.0)) < 1e-9
    rec = brunt_vaisala(prof.z, prof.rho0, prof.c0, consts)
    assert np.max(np.abs(rec - 1e-6)) < 1e-9 * 1e-6 + 1e-15
    try:
        brunt_vaisala(np.linspace(0, 1500, 51), np.full(51, 1000.0),
                      np.full(51, 1500.0), consts)
        raise AssertionError("constant density must be rejected (N^2 < 0)")
    except StratificationError:
        pass
    eos = EquationOfState(kind="incompressible", rho_ref=1000.0, alpha_T=0.0)
    try:
        z = np.linspace(0, 1500, 16)
        profile_from_temperature(z, np.full_like(z, 283.0), eos, 1500.0, consts)
        raise AssertionError("incompressible constant-T must be rejected")
    except StratificationError:
        pass
    return "buoyancy round-trips and instability rejection verified"


def check_source_examples():
    ricker = TemporalShape(kind="ricker", s_t=4.0, t_0=2.0)
    assert abs(float(ricker(2.0)) + 8.0) < 1e-12
    rect = TemporalShape(kind="smoothed_rect", s_t=4.0, t_0=2.0, r_t=1.0)
    expected = 1 / (1 + np.exp(-2.0)) - 1 / (1 + np.exp(2.0))
    assert abs(float(rect(2.5)) - expected) < 1e-12
    gd = SpatialShape(kind="gaussian_derivative", s_x=4e-5, x_0=7500.0, a=150.0)
    assert abs(float(gd(7500.0))) < 1e-14
    noise = bandlimited_noise(20.0, 4.0, 1.0 / 800.0, seed=3)
    spec = np.abs(np.fft.rfft(noise))
    freqs = np.fft.rfftfreq(len(noise), 1.0 / 800.0)
    out_of_band = spec[freqs > 20.0 + 1e-9].max() / spec.max()
    assert out_of_band < 1e-10
    return "source table values and band limits verified"


def check_lloyd_examples():
    assert abs(lloyd_bandwidth(LloydGeometry(1500.0, 1500.0, 0.5)) - 1.0) < 1e-12
    geom = LloydGeometry(z_s=1500.0, c=1500.0, sin_theta=1.0)
    mins = interference_minima(geom, k=2 * np.pi / 1500.0)
    assert np.allclose(mins, [0.0, 0.5, 1.0])
    # synthetic spectrum with 2 Hz minima spacing
    freqs = np.linspace(0, 25, 1001)
    mag = np.abs(np.sin(np.pi * freqs / 2.0)) + 0.01
    from .analysis import Spectrogram
    spec = Spectrogram(times=np.array([0.5]), freqs=freqs,
                       magnitude=mag[:, None], window_len=0, hop=1)
    df = measure_bandwidth(spec, band=(0.5, 24.5))
    assert df is not None and abs(df - 2.0) < 0.05
    return "bandwidth formula, minima and measurement verified"


def check_stable_dt_example():
    import scipy.sparse as sp
    dt = stable_dt(np.array([1.0, 1.0]), sp.diags([1.0, 4.0]).tocsr(),
                   safety=0.95)
    assert abs(dt - 0.95) < 1e-3
    return f"two-mode system dt = {dt:.4f}"


def run_verification(verbose=True):
    """Execute all checks; returns the list of CheckResult."""
    checks = [
        ("basis: GLL rules and differentiation", check_basis_examples),
        ("mesh: counts, area, Jacobians", check_mesh_examples),
        ("stratification: buoyancy identities", check_stratification_examples),
        ("sources: closed forms and band limit", check_source_examples),
        ("lloyd: theory and measurement", check_lloyd_examples),
        ("assembly: stable-dt estimate", check_stable_dt_example),
        ("criterion 1: discrete Green identity", check_green_identity),
        ("criterion 2: energy conservation", check_energy_conservation),
        ("criterion 5: barotropic reduction", check_barotropic_reduction),
    ]
    return _run(checks, verbose=verbose)
