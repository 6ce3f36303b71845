"""seaquake: spectral-element hydro-acoustic and tsunami simulation in 2D.

A stratified free-surface ocean strip is discretized with Gauss-Lobatto-
Legendre spectral elements on a terrain-following mesh.  Two equivalent
formulations of the linearized compressible flow are provided: one for the
velocity field with a Lagrange-multiplier seabed condition, and one for a
generalized scalar potential pair with Neumann seabed forcing.  Explicit
leapfrog stepping with diagonal mass matrices drives both.
"""

from .analysis import (LloydGeometry, Receiver, RemainderField, Spectrogram,
                       averaged_spectrum, interference_minima,
                       lloyd_bandwidth, lloyd_geometry, measure_bandwidth,
                       pool_spectrograms, record, remainder_diagnostics,
                       stft_spectrogram)
from .assembly import (AssembledPotentialSystem, AssembledVelocitySystem,
                       assemble_potential, assemble_velocity, dump_matrix,
                       green_identity_residual, stable_dt)
from .basis import DiffMatrix, QuadratureRule1D, diff_matrix, gll_rule
from .errors import (ConfigurationError, DivergenceError, NumericError,
                     SeaquakeError, StratificationError)
from .mesh import (DiscretizationSpec, DomainSpec, Mesh, TopographySpec,
                   boundary_normal, build_mesh, load_topography_file)
from .scenario import (ReceiverSpec, RunManifest, ScenarioConfig,
                       format_config, list_presets, parse_config, preset,
                       run_scenario)
from .solver import (EnergyTrace, PotentialState, SpongeLayer, TimeGrid,
                     VelocityState, accumulate_displacement, apply_sponge,
                     discrete_energy, recover_velocity, step_potential,
                     step_velocity)
from .sources import (SourceModel, SpatialShape, TemporalShape,
                      bandlimited_noise, bottom_forcing_vector)
from .stratification import (EquationOfState, PhysicalConstants,
                             StratificationProfile, brunt_vaisala,
                             constant_N_profile, hydrostatic_pressure,
                             profile_from_temperature)

__version__ = "0.1.0"
