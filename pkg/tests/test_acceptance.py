"""Acceptance checks at their stated tolerances.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion together with the measured quantities.
"""

import time

import numpy as np
import pytest

from cylspec.adi import SylvesterProblem, adi_solve, dense_sylvester_oracle, plan_shifts
from cylspec.baseline import FDGrid, collocation_heat_run, fd_heat_run
from cylspec.grid import GridField, GridSpec, check_physical_consistency, grid_mesh
from cylspec.manufactured import (
    CartesianPolynomial,
    heat_exact,
    heat_forcing,
    heat_problem,
    poisson_exact,
    poisson_rhs,
)
from cylspec.ptns import (
    NSState,
    PTScalars,
    VectorFieldCoeffs,
    advective_term,
    curl,
    curl_pt,
    divergence,
    laplacian,
    nonlinear_term,
    ns_diagnostics,
    ns_run,
    pt_decompose,
    pt_synthesize,
    velocity_from_vorticity,
)
from cylspec.solvers import reduced_modal_problem, solve_helmholtz_3d, solve_poisson_3d
from cylspec.timestep import HeatConfig, HeatState, heat_run, heat_step
from cylspec.transform import analyze, synthesize

criterion = pytest.mark.criterion


def best_time(f, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        times.append(time.perf_counter() - t0)
    return min(times)


def heat_table_run(size, steps=200, h=0.01):
    spec = GridSpec(size, size, size)
    init, g, exact = heat_problem(spec)
    cfg = HeatConfig(alpha=1.0, h=h, order=4, forcing_mode="exact")
    t0 = time.perf_counter()
    traj = heat_run(cfg, init, g, steps=steps, output_every=steps)
    seconds = time.perf_counter() - t0
    ref = exact(traj.times[-1])
    return float(np.max(np.abs(traj.fields[-1].values - ref)) / np.max(np.abs(ref))), seconds


def poly_scalars(rng, spec, degree=3, wall="r"):
    return PTScalars(CartesianPolynomial.random(degree, rng, wall).coeffs_on(spec),
                     CartesianPolynomial.random(degree, rng, wall).coeffs_on(spec))


# --------------------------------------------------------------------------


@criterion(1, "heat error table (200 BDF4 steps)")
def test_heat_error_table(record_property):
    err15, sec15 = heat_table_run(15)
    err7, _ = heat_table_run(7)
    record_property("measured", f"15^3 error {err15:.2e} in {sec15:.1f} s, 7^3 error {err7:.2e}")
    assert err15 <= 1e-4
    assert sec15 <= 60
    assert err7 <= 1e-3


@criterion(2, "quasi-optimal scaling")
def test_per_step_scaling(record_property):
    sizes = [8, 16, 32, 64]
    times = []
    for size in sizes:
        spec = GridSpec(size, size, size)
        init = CartesianPolynomial.random(3, np.random.default_rng(size), "rz").field(spec)
        state = HeatState.initial(init, HeatConfig(h=0.01, order=4))
        for _ in range(4):
            state = heat_step(state, None)
        times.append(best_time(lambda: heat_step(state, None), repeat=3 if size == 64 else 5))
    N = np.array(sizes, dtype=float) ** 3
    slope = np.polyfit(np.log(N * np.log(N)), np.log(times), 1)[0]
    record_property("measured", "per-step ms " + "/".join(f"{1e3 * t:.1f}" for t in times)
                    + f", slope {slope:.2f}")
    assert slope <= 1.25


@criterion(2, "quasi-optimal scaling")
def test_dense_path_is_much_slower(record_property):
    spec = GridSpec(16, 16, 16)
    rhs = CartesianPolynomial.random(4, np.random.default_rng(0)).coeffs_on(spec)
    solve_helmholtz_3d(rhs, 0.01)
    t_adi = best_time(lambda: solve_helmholtz_3d(rhs, 0.01), repeat=7)
    t_dense = best_time(lambda: solve_helmholtz_3d(rhs, 0.01, method="dense"), repeat=3)
    ratio = t_dense / t_adi
    record_property("measured", f"dense/ADI time ratio at 16^3 {ratio:.1f}")
    assert ratio >= 10, f"dense path only {ratio:.1f}x slower than ADI at 16^3"


@criterion(3, "ADI correctness and iteration count")
def test_adi_matches_oracle(record_property):
    sizes = [8, 16, 32]
    worst = 0.0
    for seed in range(25):
        rng = np.random.default_rng(seed)
        m = sizes[seed % 3]
        op = reduced_modal_problem(m, m, int(rng.integers(0, 6)), float(rng.uniform(1e-3, 1.0)))
        prob = SylvesterProblem(op.A, op.B, op.C, op.D, rng.standard_normal(op.E.shape))
        X = adi_solve(prob)
        ref = dense_sylvester_oracle(prob)
        worst = max(worst, np.linalg.norm(X - ref) / np.linalg.norm(ref))
    c0 = []
    for m in sizes:
        op = reduced_modal_problem(m, m, 0, 0.01)
        c0.append(plan_shifts(op.A, op.B, op.C, op.D).J / np.log(m * m))
    record_property("measured", f"worst relative error {worst:.1e}, J/log(mn) "
                    + "/".join(f"{c:.2f}" for c in c0))
    assert worst <= 1e-10
    assert max(c0) / min(c0) <= 2


@criterion(4, "BDF temporal order")
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_bdf_temporal_order(order, record_property):
    init, g, exact = heat_problem(GridSpec(8, 8, 8))
    hs = np.array([0.02, 0.01, 0.005])
    errs = []
    for h in hs:
        steps = int(round(1.0 / h))
        traj = heat_run(HeatConfig(h=h, order=order, forcing_mode="exact"), init, g, steps=steps,
                        output_every=steps)
        ref = exact(traj.times[-1])
        errs.append(np.max(np.abs(traj.fields[-1].values - ref)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    record_property("measured", f"BDF{order} slope {slope:.2f}")
    assert abs(slope - order) <= 0.3


@criterion(5, "Poisson spectral accuracy")
def test_poisson_spectral_accuracy(record_property):
    errs = []
    sizes = [8, 12, 16, 20, 24]
    for size in sizes:
        spec = GridSpec(size, size, 8)
        R, Z, T = grid_mesh(spec)
        u = solve_poisson_3d(analyze(GridField(spec, poisson_rhs(R, Z, T))))
        errs.append(float(np.max(np.abs(synthesize(u, real=True).values - poisson_exact(R, Z, T)))))
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    record_property("measured", "errors " + "/".join(f"{e:.1e}" for e in errs))
    assert errs[-1] <= 1e-10
    # geometric decay: every refinement by 4 gains at least a factor 10
    assert np.all(ratios <= 0.1)


@criterion(6, "transform round trip")
def test_transform_round_trip(record_property):
    spec = GridSpec(16, 16, 16)
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal(spec.shape)
        # average the two copies of every physical point
        v = 0.5 * (v + np.roll(v[:, :, ::-1], spec.p // 2, axis=0))
        f = GridField(spec, v)
        assert check_physical_consistency(f, 1e-15)
        back = synthesize(analyze(f), real=True)
        worst = max(worst, np.max(np.abs(back.values - v)) / np.max(np.abs(v)))
    record_property("measured", f"worst relative error {worst:.1e}")
    assert worst <= 1e-12


@criterion(7, "poloidal-toroidal identities")
def test_pt_identities(record_property):
    spec = GridSpec(12, 12, 12)
    rng = np.random.default_rng(7)
    worst = dict(decompose=0.0, curl=0.0, potential=0.0, divergence=0.0)
    for _ in range(5):
        s = poly_scalars(rng, spec)
        V = pt_synthesize(s)
        worst["decompose"] = max(worst["decompose"], (pt_decompose(V) - s).max_abs() / s.max_abs())
        direct = curl(V)
        worst["curl"] = max(worst["curl"], (direct - pt_synthesize(curl_pt(s))).max_abs() / direct.max_abs())
        psi = poly_scalars(rng, spec, wall="")
        lhs = curl(curl(pt_synthesize(psi)))
        rhs = pt_synthesize(PTScalars(-laplacian(psi.lam), -laplacian(psi.gam)))
        worst["potential"] = max(worst["potential"], (lhs - rhs).max_abs() / lhs.max_abs())
        omega = curl_pt(PTScalars(s.lam, CartesianPolynomial.random(3, rng, "rrzz").coeffs_on(spec)))
        vel = pt_synthesize(velocity_from_vorticity(omega))
        worst["divergence"] = max(worst["divergence"], divergence(vel).max_abs() / vel.max_abs())
    record_property("measured", ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert worst["decompose"] <= 1e-10
    assert worst["curl"] <= 1e-9
    assert worst["potential"] <= 1e-9
    assert worst["divergence"] <= 1e-10


@criterion(8, "Stokes limit equals two heat runs")
def test_stokes_limit(record_property):
    spec = GridSpec(12, 12, 12)
    rng = np.random.default_rng(8)
    omega0 = poly_scalars(rng, spec, degree=2, wall="rrzz")
    re, h, steps = 10.0, 0.01, 50
    lams, gams = [], []
    state = NSState.initial(omega0, re, h, include_nonlinear=False)
    ns_run(state, steps, callback=lambda s: (lams.append(s.current.lam), gams.append(s.current.gam)))
    cfg = HeatConfig(alpha=1 / re, h=h, order=4)
    ref_l = heat_run(cfg, omega0.lam, None, steps=steps, as_coeffs=True).fields[1:]
    ref_g = heat_run(cfg, omega0.gam, None, steps=steps, as_coeffs=True).fields[1:]
    err = max(max(np.max(np.abs(a.data - b.data)) for a, b in zip(lams, ref_l)),
              max(np.max(np.abs(a.data - b.data)) for a, b in zip(gams, ref_g)))
    record_property("measured", f"max deviation {err:.1e} over {len(lams)} steps")
    assert len(lams) == steps
    assert err <= 1e-12


@criterion(9, "Navier-Stokes self-convergence")
def test_navier_stokes_order(record_property):
    spec = GridSpec(16, 16, 16)
    omega0 = poly_scalars(np.random.default_rng(5), spec, degree=2, wall="rrzz")
    T, hs = 0.05, [0.005, 0.0025, 0.00125]
    finals, divs = [], []
    for h in hs:
        state = ns_run(NSState.initial(omega0, 100.0, h), int(round(T / h)))
        finals.append(state.current)
        divs.append(ns_diagnostics(state)["max_divergence"])
    d = [(finals[i] - finals[i + 1]).max_abs() for i in range(2)]
    order = np.log2(d[0] / d[1])
    record_property("measured", f"observed order {order:.2f}, final divergence {max(divs):.1e}")
    assert order >= 3
    assert max(divs) <= 1e-10


@criterion(9, "Navier-Stokes self-convergence")
def test_nonlinear_cross_oracle(record_property):
    spec = GridSpec(16, 16, 16)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(3):
        v = poly_scalars(rng, spec, degree=2)
        a = nonlinear_term(v, curl_pt(v))
        adv = advective_term(pt_synthesize(v))
        b = pt_decompose(curl(VectorFieldCoeffs(*(-c for c in adv.components))), check_divergence=False)
        worst = max(worst, (a - b).max_abs() / max(1.0, a.max_abs()))
    record_property("measured", f"cross-oracle deviation {worst:.1e}")
    assert worst <= 1e-8


@criterion(10, "baseline comparison")
def test_baseline_comparison(record_property):
    # finite differences: 6 backward Euler steps to the same final time as 200 steps of h = 0.01
    grid = FDGrid(61, 61, 61)
    traj = fd_heat_run(grid, 1.0, 2.0 / 6, lambda R, Z, T: heat_exact(R, Z, T, 0.0),
                       lambda R, Z, T, t: heat_forcing(R, Z, T, t), steps=6, output_every=6)
    R, Z, T = grid.mesh()
    ref = heat_exact(R, Z, T, traj.times[-1])
    fd_err = float(np.max(np.abs(traj.fields[-1] - ref)) / np.max(np.abs(ref)))
    sp_err, _ = heat_table_run(15)
    _, t_spectral = heat_table_run(19)
    spec = GridSpec(19, 19, 19)
    t0 = time.perf_counter()
    collocation_heat_run(spec, 1.0, 0.01, lambda R, Z, T: heat_exact(R, Z, T, 0.0),
                         lambda R, Z, T, t: heat_forcing(R, Z, T, t), steps=200, output_every=200)
    t_colloc = time.perf_counter() - t0
    record_property("measured", f"FD 61^3 error {fd_err:.1e}, spectral 15^3 error {sp_err:.1e}, "
                    f"19^3 collocation {t_colloc:.1f} s vs spectral {t_spectral:.1f} s")
    assert fd_err >= 1e-2
    assert sp_err <= 1e-4
    assert t_colloc > t_spectral
