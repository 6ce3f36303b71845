"""Landslide hydro-acoustics: the Lloyd mirror interference pattern.

A small seabed emitter radiates band-limited noise (0-20 Hz).  Each
receiver hears the direct wave plus its free-surface reflection, so the
received spectrum carries interference nulls whose spacing (the
"bandwidth") encodes the receiver geometry: Delta f = c / (2 z_s sin(theta))
with sin(theta) = receiver depth below surface / horizontal range.

The demo runs the scenario (about two minutes), writes the receiver
spectrograms, and compares per-depth measured bandwidths against the
two-ray theory.

Run:  python3 demos/demo_landslide_interference.py
Render a spectrogram afterwards:
  node frontend/dist/cli.js render --kind spectrogram \
      --in demos/output/landslide/spectrograms/R1_magnitude.csv,\
demos/output/landslide/spectrograms/R1_times.csv,\
demos/output/landslide/spectrograms/R1_freqs.csv \
      --bandwidth 2.5 --out demos/output/landslide/R1.svg
"""
import pathlib

from seaquake import (lloyd_bandwidth, measure_bandwidth, pool_spectrograms,
                      run_scenario, stft_spectrogram)
from seaquake.scenario import export_spectrograms, lloyd_receiver_geometry, preset

OUT = pathlib.Path(__file__).parent / "output" / "landslide"

cfg = preset("sim3")
print(f"domain {cfg.x_max / 1000:g} km, emitter at x = {cfg.source_x0 / 1000:g} km"
      f" on the seabed, noise band 0-{cfg.source_fmax:g} Hz, T = {cfg.duration:g} s")
print("theoretical bandwidths (two-ray far field):")
for spec in cfg.receivers:
    geom = lloyd_receiver_geometry(cfg, spec)
    print(f"  {spec.id} at (+{(spec.x - cfg.source_x0) / 1000:g} km,"
          f" z = {spec.z / 1000:g} km): {lloyd_bandwidth(geom):5.2f} Hz")

print("\nrunning the scenario...")
man = run_scenario(cfg, OUT)
recs = man.results["potential"]["receivers"]
export_spectrograms([recs[r] for r in ("R1", "R2", "R3", "R4")],
                    OUT / "spectrograms", window_len=384)

def pooled(ids):
    specs = []
    for rid in ids:
        t, s = recs[rid].as_arrays()
        specs.append(stft_spectrogram(s, recs[rid].dt_record, 384))
    return measure_bandwidth(pool_spectrograms(specs), band=(1.0, 19.0),
                             prominence=0.4)

deep = pooled(["R1", "R2"])
shallow = pooled(["R3", "R4"])
print(f"\nmeasured bandwidth, deep pair (z = 0.3 km)   : {deep:.2f} Hz")
print(f"measured bandwidth, shallow pair (z = 1.35 km): {shallow:.2f} Hz")
print("the rigid seabed folds extra multipath into the shallow pair, so its")
print("measured spacing sits well below the surface-reflection-only theory.")
print(f"\nspectrogram CSVs in {OUT / 'spectrograms'}")
