"""Frozen-coefficient channel problems and the doubled-torus transport."""

import numpy as np
import pytest

from cpelab import (
    COS,
    ConstraintFault,
    Grid,
    ParabolicProblem,
    PhysParams,
    ScalarField2D,
    ScalarField3D,
    UsageFault,
    VectorField3D2C,
    advance_parabolic,
    frozen_sources,
    make_initial,
    solve_channel_parabolic,
)
from cpelab.parabolic import advance_coupled_linear


def ones_field(grid):
    return ScalarField3D(grid, np.ones((grid.nx, grid.ny, grid.nz + 1)), COS)


def test_vector_problem_fourth_order(grid16, params):
    """Constant coefficients make the decay rate exact; halving dt must
    cut the error ~16x while staying clear of roundoff."""
    X, _, Z = grid16.mesh3d()
    u0 = VectorField3D2C(
        grid16, np.stack([np.cos(3 * X) * np.cos(2 * np.pi * Z), np.zeros_like(X)]), COS
    )
    rate = -(params.mu * (9 + 4 * np.pi**2) + (params.mu + params.lam) * 9)
    T = 0.02
    exact = np.exp(rate * T) * u0.data
    errs = []
    for dt in (8e-4, 4e-4):
        out = solve_channel_parabolic("v", u0, ones_field(grid16), T, params, dt=dt)
        errs.append(np.abs(out.data - exact).max())
    assert errs[0] > 1e-9  # signal above roundoff
    assert 12.0 <= errs[0] / errs[1] <= 20.0


def test_sigma_problem_exact_decay(grid16, params):
    _, _, Z = grid16.mesh3d()
    s0 = ScalarField3D(grid16, np.cos(2 * np.pi * Z), COS)
    out = solve_channel_parabolic("sigma", s0, ones_field(grid16), 0.05, params, dt=2e-4)
    exact = np.exp(-params.nu * (2 * np.pi) ** 2 * 0.05) * s0.data
    np.testing.assert_allclose(out.data, exact, atol=1e-12)


def test_sigma_problem_epsilon_horizontal(grid16):
    par = PhysParams(epsilon=0.25)
    X, _, _ = grid16.mesh3d()
    s0 = ScalarField3D(grid16, np.cos(X), COS)
    out = solve_channel_parabolic("sigma", s0, ones_field(grid16), 0.1, par, dt=5e-4)
    np.testing.assert_allclose(out.data, np.exp(-0.25 * 0.1) * s0.data, atol=1e-12)


def test_constants_are_steady(grid16, params):
    c = ScalarField3D(grid16, np.full((16, 16, 17), 3.0), COS)
    out = solve_channel_parabolic("sigma", c, ones_field(grid16), 0.05, params)
    np.testing.assert_allclose(out.data, c.data, atol=1e-13)


def test_unknown_kind_rejected(grid16, params):
    with pytest.raises(UsageFault):
        solve_channel_parabolic("p", ones_field(grid16), ones_field(grid16), 0.1, params)


def test_problem_validation(grid16):
    u0 = np.zeros((16, 16, 32))
    with pytest.raises(ConstraintFault):
        ParabolicProblem(grid16, 0.0, 0.0, u0, 0.1)
    with pytest.raises(ConstraintFault):
        ParabolicProblem(grid16, 1.0, -1.0, u0, 0.1)
    with pytest.raises(ConstraintFault):
        ParabolicProblem(grid16, 1.0, 0.0, u0, -0.1)
    with pytest.raises(ConstraintFault):
        ParabolicProblem(grid16, 1.0, 0.0, np.zeros((3, 16, 16, 32)), 0.1)


def test_torus_heat_decay(grid16):
    """Doubled torus: cos(pi z) is a single z mode with rate -pi^2."""
    zt = np.arange(32) / 16.0  # period-2 torus coordinate
    u0 = np.broadcast_to(np.cos(np.pi * zt), (16, 16, 32)).copy()
    prob = ParabolicProblem(grid16, 1.0, 0.0, u0, 0.1)
    out = advance_parabolic(prob, dt=2e-4)
    np.testing.assert_allclose(out, np.exp(-np.pi**2 * 0.1) * u0, atol=1e-11)


def test_coupled_linear_record_stages_equivalent(grid16, weak_params):
    """Dropping stage records must not change the computed trajectory."""
    initial = make_initial("smooth-random", grid16, weak_params, amplitude=0.1, seed=3)
    frozen = frozen_sources(initial, weak_params)

    def sampler(step, stage, t):
        return (initial.sigma, *frozen)

    recs_a, states_a = advance_coupled_linear(
        initial, weak_params, 1e-3, 4, sampler, record_stages=True
    )
    recs_b, states_b = advance_coupled_linear(
        initial, weak_params, 1e-3, 4, sampler, record_stages=False
    )
    assert len(states_a) == len(states_b) == 5
    assert np.array_equal(states_a[-1].v.data, states_b[-1].v.data)
    assert np.array_equal(states_a[-1].sigma.data, states_b[-1].sigma.data)
    assert np.array_equal(states_a[-1].p.data, states_b[-1].p.data)
    assert len(recs_a[0]) == 4
    assert len(recs_b[0]) == 1
    # the step-start record is the shared state object, not a copy
    assert recs_b[1][0] is states_b[1]


def test_coupled_linear_keeps_boundaries_clean(grid16, weak_params):
    initial = make_initial("smooth-random", grid16, weak_params, amplitude=0.2, seed=9)
    frozen = frozen_sources(initial, weak_params)

    def sampler(step, stage, t):
        return (initial.sigma, *frozen)

    _, states = advance_coupled_linear(initial, weak_params, 5e-4, 8, sampler)
    final = states[-1]
    from cpelab.spectral import ddz

    dzv = ddz(final.v.component(0))
    assert abs(dzv.data[..., 0]).max() <= 1e-11
    assert abs(dzv.data[..., -1]).max() <= 1e-11
