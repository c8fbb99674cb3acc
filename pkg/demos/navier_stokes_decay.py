"""
Decaying flow in a closed cylinder
==================================

Smooth vorticity that vanishes on the wall is advanced with IMEX BDF4 at
``Re = 100``.  The velocity is rebuilt from the poloidal and toroidal
scalars at every step, so it stays divergence-free to rounding error.
The wall conditions are imposed on the vorticity scalars rather than on the
velocity, so the velocity slips along the wall; the ``wall slip`` column
shows by how much.  A slice of the axial velocity is written to CSV at the end.
"""

###########################################################################
# Initial vorticity scalars.

from pathlib import Path
import tempfile

import numpy as np

from cylspec import GridSpec, NSState, PTScalars, export_slice_csv, ns_run, pt_synthesize
from cylspec.manufactured import CartesianPolynomial
from cylspec.ptns import ns_diagnostics, velocity_from_vorticity

spec = GridSpec(12, 12, 12)
rng = np.random.default_rng(3)
omega0 = PTScalars(CartesianPolynomial.random(2, rng, "rrzz").coeffs_on(spec),
                   CartesianPolynomial.random(2, rng, "rrzz").coeffs_on(spec))

###########################################################################
# Step and watch the energy decay.

state = NSState.initial(omega0, reynolds=100.0, h=0.01)
print(f"{'t':>6}{'energy':>12}{'max div':>12}{'wall slip':>12}")


def report(s):
    if s.steps % 10 == 0:
        d = ns_diagnostics(s)
        print(f"{d['time']:>6.2f}{d['energy']:>12.4e}{d['max_divergence']:>12.1e}{d['wall_slip']:>12.1e}")


report(state)
state = ns_run(state, 40, callback=report)

###########################################################################
# Export the axial velocity on the mid-plane.

vz = pt_synthesize(velocity_from_vorticity(state.current)).comp_z
out = Path(tempfile.mkdtemp()) / "vz_midplane.csv"
export_slice_csv(vz, "z", 0.0, out, resolution=21)
print(f"wrote {out}")
