"""Background ocean states: constant-N columns and temperature-derived profiles.

Walks through the two ways of building a stratification:

1. the closed-form column with constant buoyancy frequency N and constant
   sound speed, where the density decays exponentially with height, and
2. hydrostatic integration of a temperature profile through an equation of
   state, which produces depth-dependent density, sound speed and N(z)
   with a buoyancy maximum at the thermocline.

Run:  python3 demos/demo_stratification.py
"""
import pathlib

import numpy as np

from seaquake import (EquationOfState, PhysicalConstants, brunt_vaisala,
                      constant_N_profile, profile_from_temperature)

OUT = pathlib.Path(__file__).parent / "output" / "stratification"
OUT.mkdir(parents=True, exist_ok=True)

H = 1500.0
consts = PhysicalConstants()

print("=== constant-N column (N = 1e-3 1/s, c0 = 1500 m/s) ===")
prof = constant_N_profile(1000.0, 1500.0, 1e-3, H)
n2 = 1e-6 / consts.g + consts.g / 1500.0**2
print(f"density decay exponent n^2 = {n2:.4e} 1/m")
print(f"rho(0)      = {prof.rho(0.0):9.3f} kg/m^3  (seabed)")
print(f"rho(H)      = {prof.rho(H):9.3f} kg/m^3  (surface)")
rec = brunt_vaisala(prof.z, prof.rho0, prof.c0)
print(f"recovered N^2: max deviation {np.max(np.abs(rec - 1e-6)):.2e} 1/s^2")

print()
print("=== temperature-derived column (warm mixed layer over cold deep water) ===")
z = np.linspace(0.0, H, 301)
z_th, width = H - 300.0, 120.0
T = 277.0 + 13.0 / (1.0 + np.exp(-(z - z_th) / width))
eos = EquationOfState(kind="linear_compressibility", rho_ref=1000.0,
                      alpha_T=2.0e-4, kappa=4.5e-10)
thermo = profile_from_temperature(z, T, eos, H)
peak_z = thermo.z[np.argmax(thermo.N2)]
print(f"sound speed  : {thermo.c0.min():7.1f} .. {thermo.c0.max():7.1f} m/s")
print(f"density range: {thermo.rho0.min():7.2f} .. {thermo.rho0.max():7.2f} kg/m^3")
print(f"N no deeper than the thermocline: peak N = {np.sqrt(thermo.N2.max()):.2e} 1/s"
      f" at z = {peak_z:.0f} m (thermocline at {z_th:.0f} m)")

table = np.column_stack([thermo.z, thermo.rho0, thermo.c0, thermo.N2])
np.savetxt(OUT / "thermocline_profile.csv", table,
           header="z_m,rho0_kgm3,c0_ms,N2_s2", delimiter=",", comments="")
print(f"\nwrote {OUT / 'thermocline_profile.csv'}")
