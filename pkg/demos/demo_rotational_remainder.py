"""How rotational is the flow?  The buoyancy remainder and its N^2 scaling.

The generalized potential splits the velocity into an irrotational part
-grad(phi) and a vertical remainder U_r = N (psi + (N/g) phi).  This demo
runs the dipolar-earthquake scenario twice, with N = 1e-3 and N = 1e-2 1/s,
and shows that

* the remainder stays orders of magnitude below the irrotational part,
* its peak scales like N^2 (the runs differ by ~100x), and
* the water column is most irrotational right under the free surface.

Run:  python3 demos/demo_rotational_remainder.py
"""
import pathlib

import numpy as np

from seaquake import run_scenario
from seaquake.scenario import preset

OUT = pathlib.Path(__file__).parent / "output" / "remainder"

peaks = {}
for name in ("sim2", "sim2_n10"):
    cfg = preset(name)
    man = run_scenario(cfg, OUT / name)
    peaks[name] = float(man.entries["remainder.peak_ur"])
    rem = man.results["potential"]["remainder"]
    avg = rem.ratio_time_average
    finite = avg[np.isfinite(avg)]
    print(f"{name}: N = {cfg.n_buoyancy:g} 1/s")
    print(f"  peak |U_r|                = {peaks[name]:.3e} m/s")
    print(f"  median time-avg |U_r|/|U| = {np.median(finite):.3e}")
    mesh = rem.mesh
    cols = avg.reshape(mesh.nnx, mesh.nnz)
    top = np.nanmedian(cols[:, -1])
    mid = np.nanmedian(cols[:, mesh.nnz // 2])
    print(f"  ratio at surface vs mid-depth: {top:.2e} vs {mid:.2e}")

ratio = peaks["sim2_n10"] / peaks["sim2"]
print(f"\npeak remainder ratio between the two runs: {ratio:.1f}"
      f"  (N^2 scaling predicts 100)")
print(f"time-averaged ratio maps written as snapshots under {OUT}")
print("render one with:")
print("  node frontend/dist/cli.js render --kind ratio_map \\")
print(f"      --in {OUT}/sim2/snapshots/grid.snap,{OUT}/sim2/remainder_ratio_avg.snap \\")
print(f"      --out {OUT}/ratio_map.svg")
