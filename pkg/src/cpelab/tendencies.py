"""Right-hand sides: the split sources Phi_1/Phi_2/Phi_3, the full tendency
of the epsilon-regularized system, and the frozen-coefficient sources
N_1/N_2/N_3 that drive the linear solves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticFields, compute_diagnostics
from .errors import (
    PositivityMarginWarning,
    PressurePositivityLost,
    SigmaPositivityLost,
)
from .fields import COS, ScalarField2D, ScalarField3D, VectorField3D2C
from .params import PhysParams
from .spectral import (
    ProductWorkspace,
    ddx,
    ddy,
    ddz,
    dealiased_sum,
    div_h,
    dzz,
    grad_h_2d,
    laplacian3,
    laplacian_h,
    vertical_average,
)

DEFAULT_FAULT_FLOOR = 1e-8


@dataclass(frozen=True)
class StateTendency:
    dv: VectorField3D2C
    dsigma: ScalarField3D
    dp: ScalarField2D


def check_positivity(
    state,
    params: PhysParams,
    fault_floor: float = DEFAULT_FAULT_FLOOR,
) -> None:
    """Abort below the fault floor; warn when half the modeling floor is crossed."""
    smin = float(state.sigma.data.min())
    pmin = float(state.p.data.min())
    if smin <= fault_floor:
        raise SigmaPositivityLost(f"min sigma = {smin:.3e} at t = {state.t:.6g}")
    if pmin <= fault_floor:
        raise PressurePositivityLost(f"min p = {pmin:.3e} at t = {state.t:.6g}")
    if smin < 0.5 * params.sigma_floor:
        warnings.warn(
            f"min sigma = {smin:.3e} below half the floor {params.sigma_floor}",
            PositivityMarginWarning,
            stacklevel=2,
        )
    if pmin < 0.5 * params.p_floor:
        warnings.warn(
            f"min p = {pmin:.3e} below half the floor {params.p_floor}",
            PositivityMarginWarning,
            stacklevel=2,
        )


def phi1(
    v: VectorField3D2C,
    sigma: ScalarField3D,
    p: ScalarField2D,
    params: PhysParams,
    diag: DiagnosticFields | None = None,
    ws: ProductWorkspace | None = None,
) -> VectorField3D2C:
    """Phi_1 = -(v . grad_h) v - w dz v - sigma grad_h p."""
    ws = ws or ProductWorkspace(v.grid)
    if diag is None:
        from .fields import State

        diag = compute_diagnostics(State(v, sigma, p), params, ws)
    v1, v2 = v.component(0), v.component(1)
    px, py = grad_h_2d(p)
    comps = []
    for vi, gpi in ((v1, px), (v2, py)):
        comps.append(
            dealiased_sum(
                [
                    (v1, ddx(vi), -1.0),
                    (v2, ddy(vi), -1.0),
                    (diag.w, ddz(vi), -1.0),
                    (sigma, gpi, -1.0),
                ],
                ws,
            )
        )
    return VectorField3D2C(v.grid, np.stack([c.data for c in comps]), COS)


def phi2(
    v: VectorField3D2C,
    sigma: ScalarField3D,
    p: ScalarField2D,
    params: PhysParams,
    diag: DiagnosticFields | None = None,
    ws: ProductWorkspace | None = None,
) -> ScalarField3D:
    """Phi_2 = -w dz sigma + sigma (div_h v - phi)."""
    ws = ws or ProductWorkspace(v.grid)
    if diag is None:
        from .fields import State

        diag = compute_diagnostics(State(v, sigma, p), params, ws)
    div_minus_phi = div_h(v) - diag.phi
    return dealiased_sum(
        [(diag.w, ddz(sigma), -1.0), (sigma, div_minus_phi, 1.0)], ws
    )


def phi3(
    v: VectorField3D2C,
    p: ScalarField2D,
    params: PhysParams,
    diag: DiagnosticFields | None = None,
    ws: ProductWorkspace | None = None,
) -> ScalarField2D:
    """Phi_3 = (gamma-1) Qbar - gamma p div_h vbar."""
    ws = ws or ProductWorkspace(v.grid)
    if diag is None:
        from .diagnostics import heating

        Q, _ = heating(v, params, ws)
    else:
        Q = diag.Q
    qbar = vertical_average(Q)
    div_vbar = vertical_average(div_h(v))
    pressure_work = dealiased_sum([(p, div_vbar, -params.gamma)], ws)
    return (params.gamma - 1.0) * qbar + pressure_work


def regularized_tendency(
    state,
    params: PhysParams,
    diag: DiagnosticFields | None = None,
    ws: ProductWorkspace | None = None,
    fault_floor: float = DEFAULT_FAULT_FLOOR,
) -> StateTendency:
    """Full tendency of the regularized system.

    dv     = Phi_1 + mu sigma Lap v + (mu+lambda) sigma grad_h div_h v
    dsigma = -v . grad_h sigma + nu sigma dzz sigma + eps Lap_h sigma + Phi_2
    dp     = -vbar . grad_h p + eps Lap_h p + Phi_3
    """
    check_positivity(state, params, fault_floor)
    ws = ws or ProductWorkspace(state.grid)
    if diag is None:
        diag = compute_diagnostics(state, params, ws)
    v, sigma, p = state.v, state.sigma, state.p
    v1, v2 = v.component(0), v.component(1)
    mu, lam, eps = params.mu, params.lam, params.epsilon

    divv = div_h(v)
    px, py = grad_h_2d(p)

    dv_comps = []
    for vi, gpi, gdi in ((v1, px, ddx(divv)), (v2, py, ddy(divv))):
        dv_comps.append(
            dealiased_sum(
                [
                    (v1, ddx(vi), -1.0),
                    (v2, ddy(vi), -1.0),
                    (diag.w, ddz(vi), -1.0),
                    (sigma, gpi, -1.0),
                    (sigma, laplacian3(vi), mu),
                    (sigma, gdi, mu + lam),
                ],
                ws,
            )
        )
    dv = VectorField3D2C(state.grid, np.stack([c.data for c in dv_comps]), COS)

    div_minus_phi = divv - diag.phi
    dz_sigma = ddz(sigma)
    dsigma = dealiased_sum(
        [
            (v1, ddx(sigma), -1.0),
            (v2, ddy(sigma), -1.0),
            (diag.w, dz_sigma, -1.0),
            (sigma, div_minus_phi, 1.0),
            (sigma, dzz(sigma), params.nu),
        ],
        ws,
    )
    if eps != 0.0:
        dsigma = dsigma + eps * laplacian_h(sigma)

    vbar1 = vertical_average(v1)
    vbar2 = vertical_average(v2)
    div_vbar = vertical_average(divv)
    dp = dealiased_sum(
        [
            (vbar1, px, -1.0),
            (vbar2, py, -1.0),
            (p, div_vbar, -params.gamma),
        ],
        ws,
    )
    dp = dp + (params.gamma - 1.0) * vertical_average(diag.Q)
    if eps != 0.0:
        dp = dp + eps * laplacian_h(p)

    return StateTendency(dv=dv, dsigma=dsigma, dp=dp)


def frozen_sources(
    state,
    params: PhysParams,
    diag: DiagnosticFields | None = None,
    ws: ProductWorkspace | None = None,
):
    """(N_1, N_2, N_3) for the frozen-coefficient linear problems.

    N_1 = Phi_1; N_2 = Phi_2 - v . grad_h sigma; N_3 = Phi_3 - vbar . grad_h p.
    """
    ws = ws or ProductWorkspace(state.grid)
    if diag is None:
        diag = compute_diagnostics(state, params, ws)
    v, sigma, p = state.v, state.sigma, state.p
    v1, v2 = v.component(0), v.component(1)
    n1 = phi1(v, sigma, p, params, diag, ws)
    div_minus_phi = div_h(v) - diag.phi
    n2 = dealiased_sum(
        [
            (diag.w, ddz(sigma), -1.0),
            (sigma, div_minus_phi, 1.0),
            (v1, ddx(sigma), -1.0),
            (v2, ddy(sigma), -1.0),
        ],
        ws,
    )
    px, py = grad_h_2d(p)
    n3 = phi3(v, p, params, diag, ws) + dealiased_sum(
        [
            (vertical_average(v1), px, -1.0),
            (vertical_average(v2), py, -1.0),
        ],
        ws,
    )
    return n1, n2, n3
