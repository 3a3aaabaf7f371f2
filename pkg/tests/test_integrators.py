"""Time stepping: stable_dt, RK4 advance, Picard sweeps."""

import math

import numpy as np
import pytest

from cpelab import (
    Grid,
    NoContraction,
    PhysParams,
    RunOptions,
    StabilityFault,
    advance,
    make_initial,
    picard_solve,
    stable_dt,
)
from cpelab.fields import constant_state
from cpelab.norms import difference_norm

PHI_AMP = 1.4099434858699084  # pi^2/7


def test_stable_dt_scalings(grid16, params):
    st = constant_state(grid16)
    dt16 = stable_dt(st, params)
    assert dt16 > 0.0
    dt24 = stable_dt(constant_state(Grid(24, 24, 24)), params)
    assert dt24 < dt16
    stiff = stable_dt(st, PhysParams(mu=4.0))
    assert stiff < dt16
    # advection shortens the step
    moving = make_initial("example-A", grid16, params, amplitude=5.0)
    assert stable_dt(moving, params) < dt16


def test_run_options_validation():
    with pytest.raises(ValueError):
        RunOptions(t_final=0.0)
    with pytest.raises(ValueError):
        RunOptions(t_final=1.0, dt=-1e-3)
    with pytest.raises(ValueError):
        RunOptions(t_final=1.0, record_every=0)


def test_equilibrium_is_fixed_point(grid16, params):
    st = constant_state(grid16)
    res = advance(st, params, RunOptions(t_final=0.05))
    assert res.fault is None
    assert np.array_equal(res.state.v.data, st.v.data)
    assert np.array_equal(res.state.sigma.data, st.sigma.data)
    assert np.array_equal(res.state.p.data, st.p.data)
    energies = {r.energy for r in res.reports}
    assert len(energies) == 1


def test_report_layout(grid16, params):
    st = make_initial("smooth-random", grid16, params, amplitude=0.05, seed=1)
    opts = RunOptions(t_final=0.01, record_every=4, keep_states=True)
    res = advance(st, params, opts)
    assert res.fault is None
    assert len(res.reports) == math.ceil(res.n_steps / 4) + 1
    # keep_states retains the full trajectory, reports only sampled steps
    assert len(res.states) == res.n_steps + 1
    assert res.reports[0].t == 0.0
    np.testing.assert_allclose(res.reports[-1].t, 0.01, atol=1e-15)
    # recorded times are strictly increasing
    ts = [r.t for r in res.reports]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_example_a_taylor_step(grid16, params):
    """For one tiny step, sigma(T) = 1 - T (pi^2/7) cos(2 pi z) + O(T^2)."""
    st = make_initial("example-A", grid16, params, amplitude=1.0)
    _, _, Z = grid16.mesh3d()
    errs = {}
    for T in (4e-4, 2e-4):
        res = advance(st, params, RunOptions(t_final=T))
        taylor = 1.0 - T * PHI_AMP * np.cos(2 * np.pi * Z)
        errs[T] = np.abs(res.state.sigma.data - taylor).max()
    assert errs[4e-4] <= 1e-5
    # remainder is quadratic in the horizon
    assert 3.2 <= errs[4e-4] / errs[2e-4] <= 4.8


def test_forced_advance_exact_linear_growth(grid16, params):
    """Constant sigma-forcing on an equilibrium integrates exactly."""
    st = constant_state(grid16)
    shape = st.sigma.data.shape
    c = 0.35

    def forcing(t):
        return (
            np.zeros((2,) + shape),
            np.full(shape, c),
            np.zeros(st.p.data.shape),
        )

    res = advance(st, params, RunOptions(t_final=0.02, dt=2e-3), forcing=forcing)
    assert res.fault is None
    np.testing.assert_allclose(res.state.sigma.data, 1.0 + c * 0.02, rtol=1e-13)
    np.testing.assert_allclose(res.state.v.data, 0.0, atol=1e-14)


def test_linear_solver_raises_stability_fault(grid16, params):
    """Past the RK4 limit the frozen-coefficient solver trips the norm
    detector (nothing thermodynamic can fault first there)."""
    from cpelab import COS, ScalarField3D, VectorField3D2C, solve_channel_parabolic

    X, _, Z = grid16.mesh3d()
    ones = ScalarField3D(grid16, np.ones((16, 16, 17)), COS)
    u0 = VectorField3D2C(
        grid16, np.stack([np.cos(3 * X) * np.cos(2 * np.pi * Z), np.zeros_like(X)]), COS
    )
    with pytest.raises(StabilityFault):
        solve_channel_parabolic("v", u0, ones, 0.05, params, dt=5e-3)


def test_blowup_fault_captured(grid16, params):
    """In the nonlinear advance an unstable dt surfaces as a captured
    fault: the oscillating stiff sigma mode flips sign before the total
    norm can grow tenfold, so positivity is the detector that fires."""
    from cpelab import SigmaPositivityLost

    st = make_initial("smooth-random", grid16, params, amplitude=0.3, seed=7)
    res = advance(st, params, RunOptions(t_final=1.0, dt=0.05))
    assert isinstance(res.fault, SigmaPositivityLost)
    assert len(res.reports) >= 1  # partial records survive the fault
    assert np.isfinite(res.state.sigma.data).all()


def test_picard_constant_data(grid16, params):
    st = constant_state(grid16)
    out = picard_solve(st, params, T=1e-3)
    assert out.report.converged
    assert out.report.iterations <= 2
    assert out.report.deltas[-1] <= 1e-12


def test_picard_small_data_contracts(grid16, weak_params):
    st = make_initial("smooth-random", grid16, weak_params, amplitude=0.1, seed=2)
    out = picard_solve(st, weak_params, T=1e-3, tol=1e-9)
    assert out.report.converged
    assert out.report.iterations <= 10
    assert all(r <= 0.5 for r in out.report.ratios[1:])


def test_picard_matches_rk4(grid12, weak_params):
    st = make_initial("smooth-random", grid12, weak_params, amplitude=0.1, seed=4)
    out = picard_solve(st, weak_params, T=1e-3, tol=1e-9)
    rk = advance(st, weak_params, RunOptions(t_final=1e-3, dt=out.report.dt))
    assert rk.fault is None
    assert difference_norm(out.state, rk.state) <= 1e-8


def test_picard_iteration_budget(grid16, weak_params):
    st = make_initial("smooth-random", grid16, weak_params, amplitude=0.1, seed=2)
    with pytest.raises(NoContraction):
        picard_solve(st, weak_params, T=1e-3, tol=1e-14, max_iter=2)
