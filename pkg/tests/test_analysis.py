"""Receivers, spectrograms, Lloyd theory, remainder diagnostics."""
import numpy as np
import pytest

from seaquake.analysis import (LloydGeometry, Receiver, RemainderField,
                               Spectrogram, averaged_spectrum,
                               interference_minima, lloyd_bandwidth,
                               lloyd_geometry, measure_bandwidth, record,
                               remainder_diagnostics, stft_spectrogram)
from seaquake.assembly import assemble_potential, assemble_velocity, stable_dt
from seaquake.errors import ConfigurationError
from seaquake.mesh import DiscretizationSpec, DomainSpec, TopographySpec, build_mesh
from seaquake.solver import (PotentialState, TimeGrid, VelocityState,
                             recover_velocity)
from seaquake.sources import SourceModel, SpatialShape, TemporalShape
from seaquake.stratification import constant_N_profile


def make_mesh(nx=8, nz=3, px=3, pz=3):
    dom = DomainSpec(0.0, 8000.0, 1500.0, TopographySpec(kind="flat"))
    return build_mesh(dom, DiscretizationSpec(nx, nz, px, pz))


PROFILE = constant_N_profile(1000.0, 1500.0, 1e-3, 1500.0)


class TestRecord:
    def test_zero_state_records_zeros(self):
        mesh = make_mesh()
        sys = assemble_velocity(mesh, PROFILE)
        state = VelocityState.zeros(sys)
        rec = Receiver("r", 4000.0, 750.0, "vertical_velocity", 0.01)
        rec.validate(mesh)
        record([rec], state, mesh, 0, TimeGrid(dt=0.01, steps=1), sys=sys)
        assert rec.samples == [0.0]

    def test_nodal_value_exact_at_node(self):
        mesh = make_mesh()
        sys = assemble_velocity(mesh, PROFILE)
        state = VelocityState.zeros(sys)
        rng = np.random.default_rng(0)
        state.U_curr = rng.standard_normal(sys.n_dofs)
        gid = mesh.conn[5][7]
        rec = Receiver("r", mesh.X[gid], mesh.Z[gid], "vertical_velocity", 0.01)
        record([rec], state, mesh, 3, TimeGrid(dt=0.01, steps=5), sys=sys)
        assert abs(rec.samples[0] - state.U_curr[mesh.n_nodes + gid]) < 1e-9
        assert rec.times[0] == pytest.approx(0.03)

    def test_linear_displacement_field_interpolated(self):
        mesh = make_mesh()
        sys = assemble_velocity(mesh, PROFILE)
        state = VelocityState.zeros(sys)
        state.displacement = np.concatenate([np.zeros(mesh.n_nodes), mesh.Z])
        rec = Receiver("r", 3000.0, 0.75 * 1500.0, "vertical_displacement", 0.01)
        record([rec], state, mesh, 0, TimeGrid(dt=0.01, steps=1))
        assert abs(rec.samples[0] - 0.75 * 1500.0) < 1e-12 * 1500.0

    def test_receiver_outside_mesh_rejected(self):
        mesh = make_mesh()
        rec = Receiver("r", 9000.0, 100.0, "vertical_velocity", 0.01)
        with pytest.raises(ConfigurationError):
            rec.validate(mesh)

    def test_unknown_quantity_rejected(self):
        with pytest.raises(ConfigurationError):
            Receiver("r", 10.0, 10.0, "sideways_vorticity", 0.01)

    def test_pressure_proxy_consistency_across_formulations(self):
        """Pressure from the velocity state (divergence evaluation) and from
        the potential state (-rho0 phi_tt) agree on a shared scenario."""
        mesh = make_mesh(nx=10, nz=4, px=4, pz=4)
        src = SourceModel(
            SpatialShape(kind="gaussian", s_x=2e-3, x_0=4000.0),
            TemporalShape(kind="ricker", s_t=4.0, t_0=1.5),
        )
        point = (5000.0, 900.0)
        vel = assemble_velocity(mesh, PROFILE)
        pot = assemble_potential(mesh, PROFILE)
        import scipy.sparse as sp
        from seaquake.solver import step_potential, step_velocity
        k_full = sp.bmat([[pot.K_phi, pot.C_psiphi],
                          [pot.C_psiphi.T, sp.diags(pot.K_psi)]]).tocsr()
        dt = min(stable_dt(vel.M_U, vel.K_U, 0.9),
                 stable_dt(np.concatenate([pot.M_phi, pot.M_psi]), k_full, 0.9))
        grid = TimeGrid(dt=dt, steps=int(4.0 / dt))
        rec_v = Receiver("v", *point, "pressure_proxy", dt)
        rec_p = Receiver("p", *point, "pressure_proxy", dt)
        sv = VelocityState.zeros(vel)
        spot = PotentialState.zeros(pot)
        for n in range(grid.steps):
            step_velocity(sv, vel, src, grid, n)
            step_potential(spot, pot, src, grid, n)
        record([rec_v], sv, mesh, grid.steps, grid, sys=vel)
        record([rec_p], spot, mesh, grid.steps, grid, sys=pot, source=src)
        a, b = rec_v.samples[0], rec_p.samples[0]
        scale = max(abs(a), abs(b))
        assert scale > 0
        assert abs(a - b) < 0.05 * scale, f"velocity {a} vs potential {b}"


class TestSpectrogram:
    def test_pure_tone_peaks_at_right_bin(self):
        dt = 0.01
        t = np.arange(0, 40.96, dt)
        x = np.sin(2 * np.pi * 5.0 * t)
        spec = stft_spectrogram(x, dt, 512)
        for frame in range(spec.magnitude.shape[1]):
            f_peak = spec.freqs[np.argmax(spec.magnitude[:, frame])]
            assert abs(f_peak - 5.0) <= spec.freqs[1] + 1e-12

    def test_zero_signal_zero_magnitude(self):
        spec = stft_spectrogram(np.zeros(2048), 0.01, 256)
        assert np.all(spec.magnitude == 0.0)

    def test_axes_and_shapes(self):
        spec = stft_spectrogram(np.random.default_rng(0).standard_normal(4001),
                                0.005, 512, hop=128)
        assert spec.freqs[0] == 0.0
        assert abs(spec.freqs[-1] - 0.5 / 0.005) < 1e-12
        assert spec.magnitude.shape == (257, len(spec.times))
        assert np.all(spec.magnitude >= 0)

    def test_degenerate_window_rejected(self):
        with pytest.raises(ConfigurationError):
            stft_spectrogram(np.zeros(100), 0.01, 512)

    def test_bandlimited_source_confined(self):
        from seaquake.sources import bandlimited_noise
        dt = 1.0 / 800.0
        x = bandlimited_noise(20.0, 30.0, dt, seed=4)
        spec = stft_spectrogram(x, dt, 1024)
        avg = averaged_spectrum(spec)
        in_band = avg[(spec.freqs > 0.5) & (spec.freqs <= 20.0)].max()
        out_band = avg[spec.freqs > 22.0].max()
        assert out_band < 0.01 * in_band


class TestLloyd:
    def test_bandwidth_formula(self):
        geom = LloydGeometry(z_s=1500.0, c=1500.0, sin_theta=0.5)
        assert lloyd_bandwidth(geom) == pytest.approx(1.0)

    def test_receiver_table_values(self):
        """Frozen table: ranges 5/8 km, depths-below-surface 1.2/0.15 km,
        source on the seabed (z_s = H = 1.5 km), c = 1500 m/s; the benchmark
        integers are the floors of the formula values."""
        table = {
            (5000.0, 1200.0): 2,
            (8000.0, 1200.0): 3,
            (5000.0, 150.0): 16,
            (8000.0, 150.0): 26,
        }
        for (rng_m, depth), want in table.items():
            geom = lloyd_geometry(0.0, 1500.0, rng_m, depth, 1500.0)
            df = lloyd_bandwidth(geom)
            assert int(df) == want, f"range {rng_m} depth {depth}: {df}"

    def test_grazing_angle_rejected(self):
        with pytest.raises(ConfigurationError):
            lloyd_bandwidth(LloydGeometry(z_s=1500.0, c=1500.0, sin_theta=0.0))

    def test_minima_sequence(self):
        geom = LloydGeometry(z_s=1500.0, c=1500.0, sin_theta=1.0)
        mins = interference_minima(geom, k=2 * np.pi / 1500.0)
        assert np.allclose(mins, [0.0, 0.5, 1.0])
        only_one = interference_minima(geom, k=0.5 * np.pi / 1500.0)
        assert np.allclose(only_one, [0.0])

    def test_minima_spacing_matches_bandwidth(self):
        # frequency spacing of the nulls at fixed geometry equals Delta f
        rng = np.random.default_rng(5)
        for _ in range(20):
            geom = LloydGeometry(z_s=rng.uniform(100, 3000),
                                 c=rng.uniform(1400, 1600),
                                 sin_theta=rng.uniform(0.05, 1.0))
            # null frequencies: k z_s sin(theta) = m pi
            f1 = 1.0 * np.pi * geom.c / (2 * np.pi * geom.z_s * geom.sin_theta)
            f2 = 2.0 * np.pi * geom.c / (2 * np.pi * geom.z_s * geom.sin_theta)
            assert abs((f2 - f1) - lloyd_bandwidth(geom)) < 1e-12 * f2


class TestMeasureBandwidth:
    def synthetic_spec(self, spacing=2.0):
        freqs = np.linspace(0.0, 25.0, 1281)
        mag = np.abs(np.sin(np.pi * freqs / spacing)) + 0.02
        return Spectrogram(times=np.array([1.0]), freqs=freqs,
                           magnitude=mag[:, None], window_len=0, hop=1)

    def test_synthetic_two_hz_minima(self):
        df = measure_bandwidth(self.synthetic_spec(2.0), band=(0.5, 24.5))
        assert df is not None and abs(df - 2.0) < 0.05

    def test_synthetic_five_hz_minima(self):
        df = measure_bandwidth(self.synthetic_spec(5.0), band=(0.5, 24.5))
        assert df is not None and abs(df - 5.0) < 0.1

    def test_sloped_baseline_does_not_bias(self):
        freqs = np.linspace(0.0, 25.0, 1281)
        mag = (np.abs(np.sin(np.pi * freqs / 2.0)) + 0.05) * (1.0 + freqs) ** 2
        spec = Spectrogram(times=np.array([1.0]), freqs=freqs,
                           magnitude=mag[:, None], window_len=0, hop=1)
        df = measure_bandwidth(spec, band=(0.5, 24.5))
        assert df is not None and abs(df - 2.0) < 0.05

    def test_failure_result_without_minima(self):
        freqs = np.linspace(0.0, 25.0, 200)
        mag = np.ones_like(freqs)
        spec = Spectrogram(times=np.array([1.0]), freqs=freqs,
                           magnitude=mag[:, None], window_len=0, hop=1)
        assert measure_bandwidth(spec) is None


class TestRemainder:
    def run_potential(self, N, steps=150):
        mesh = make_mesh(nx=10, nz=4, px=4, pz=4)
        prof = constant_N_profile(1000.0, 1500.0, N, 1500.0)
        sys = assemble_potential(mesh, prof)
        import scipy.sparse as sp
        from seaquake.solver import step_potential
        k_full = sp.bmat([[sys.K_phi, sys.C_psiphi],
                          [sys.C_psiphi.T, sp.diags(sys.K_psi)]]).tocsr()
        dt = stable_dt(np.concatenate([sys.M_phi, sys.M_psi]), k_full, 0.9)
        grid = TimeGrid(dt=dt, steps=steps)
        src = SourceModel(
            SpatialShape(kind="gaussian_derivative", s_x=4e-5, x_0=4000.0,
                         a=150.0),
            TemporalShape(kind="ricker", s_t=4.0, t_0=1.5),
        )
        state = PotentialState.zeros(sys)
        rem = RemainderField(mesh)
        peak = 0.0
        for n in range(grid.steps):
            step_potential(state, sys, src, grid, n)
            recover_velocity(state, sys)
            remainder_diagnostics(state, sys, mesh, rem)
            peak = max(peak, float(np.abs(rem.U_r).max()))
        return mesh, rem, peak

    def test_barotropic_remainder_vanishes(self):
        _, rem, peak = self.run_potential(0.0, steps=60)
        assert peak == 0.0

    def test_cancellation_inside_parentheses(self):
        mesh = make_mesh()
        sys = assemble_potential(mesh, PROFILE)
        state = PotentialState.zeros(sys)
        rng = np.random.default_rng(2)
        state.Phi_curr = rng.standard_normal(sys.n_dofs)
        n_nodal = np.sqrt(sys.coeffs.n2)
        state.Psi_curr = -(n_nodal / sys.coeffs.g) * state.Phi_curr
        recover_velocity(state, sys)
        rem = remainder_diagnostics(state, sys, mesh)
        assert np.max(np.abs(rem.U_r)) < 1e-14

    def test_ratio_bounded_and_masked(self):
        _, rem, _ = self.run_potential(1e-3, steps=100)
        finite = rem.ratio[np.isfinite(rem.ratio)]
        assert np.all(finite >= 0.0)
        assert np.all(finite <= 1.0 + 1e-9)

    def test_n_squared_scaling_of_peak(self):
        _, _, p1 = self.run_potential(1e-3, steps=120)
        _, _, p2 = self.run_potential(1e-2, steps=120)
        assert 80.0 < p2 / p1 < 120.0

    def test_surface_has_smallest_ratio_in_column(self):
        mesh, rem, _ = self.run_potential(1e-3, steps=150)
        avg = rem.ratio_time_average.reshape(mesh.nnx, mesh.nnz)
        checked = 0
        for i in range(0, mesh.nnx, 5):
            col = avg[i][np.isfinite(avg[i])]
            if len(col) > 4:
                checked += 1
                assert col[-1] <= np.median(col) * (1 + 1e-9)
        assert checked > 3
