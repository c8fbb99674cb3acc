"""
ADI shifts and convergence on a modal Helmholtz problem
=======================================================

One Fourier mode of ``(1 - s Laplacian) u = f`` is a Sylvester equation
``A X B + C X D = E``.  The shifts come from the spectral intervals of the
two generalized eigenproblems, and their number grows like ``log(m n)``.
"""

###########################################################################
# Shift plans for growing sizes.

import numpy as np

from cylspec import SylvesterProblem, adi_solve, dense_sylvester_oracle
from cylspec.adi import plan_shifts
from cylspec.solvers import reduced_modal_problem

print(f"{'m = n':>6}{'J':>5}{'J / log(mn)':>14}{'gamma':>12}")
for m in (8, 16, 32, 64):
    op = reduced_modal_problem(m, m, 0, 0.01)
    plan = plan_shifts(op.A, op.B, op.C, op.D)
    print(f"{m:>6}{plan.J:>5}{plan.J / np.log(m * m):>14.2f}{plan.gamma_cr:>12.3g}")

###########################################################################
# Residual history of one solve against the dense Kronecker oracle.

rng = np.random.default_rng(1)
op = reduced_modal_problem(24, 24, 3, 0.05)
prob = SylvesterProblem(op.A, op.B, op.C, op.D, rng.standard_normal(op.E.shape))
X, history = adi_solve(prob, record_history=True)
ref = dense_sylvester_oracle(prob)
print("backward error per iteration:", " ".join(f"{h:.0e}" for h in history))
print(f"relative difference from the oracle: {np.linalg.norm(X - ref) / np.linalg.norm(ref):.1e}")
