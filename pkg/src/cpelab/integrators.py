"""Time integration: direct RK4 of the full nonlinear system, and the
fixed-point (Picard) solver built on frozen-coefficient linear sweeps.

The Picard map records every RK4 stage state of the current iterate; the
next sweep's linear problems sample coefficients and sources at exactly
those (step, stage) points. A fixed point of that map therefore reproduces
the nonlinear RK4 trajectory stage for stage, which is what makes the
cross-method comparison between the two integration paths meaningful.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import boundary_defects, compute_diagnostics, total_mass
from .errors import CpeError, NoContraction, StabilityFault
from .fields import ScalarField2D, ScalarField3D, State, VectorField3D2C
from .norms import EnergyReport, energy_report, sobolev_norm
from .params import PhysParams
from .parabolic import advance_coupled_linear
from .spectral import ddz
from .tendencies import (
    StateTendency,
    frozen_sources,
    check_positivity,
    regularized_tendency,
)


@dataclass(frozen=True)
class RunOptions:
    t_final: float
    dt: float | None = None  # None -> stable_dt at the initial state
    record_every: int = 1
    cfl: float = 1.0
    fault_floor: float = 1e-8
    tol_bc: float = 1e-11
    keep_states: bool = False

    def __post_init__(self):
        if not self.t_final > 0.0:
            raise ValueError("t_final must be positive")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class AdvanceResult:
    state: State
    reports: list[EnergyReport]
    fault: CpeError | None
    dt: float
    n_steps: int
    warnings: list[str] = field(default_factory=list)
    states: list[State] | None = None


def stable_dt(state: State, params: PhysParams, cfl: float = 1.0) -> float:
    """Explicit step bound from the stiffest retained modes.

    Diffusive rates use the dealiased cutoffs k_h,max^2 = (nx/2-1)^2 +
    (ny/2-1)^2 and k_max^2 = k_h,max^2 + (pi nz)^2; advective rates use the
    sup of |v| and of the diagnosed |w|.
    """
    g = state.grid
    diag = compute_diagnostics(state, params)
    kh2 = float((g.nx // 2 - 1) ** 2 + (g.ny // 2 - 1) ** 2)
    kz2 = (np.pi * g.nz) ** 2
    k2 = kh2 + kz2
    sig_max = float(state.sigma.data.max())
    v_inf = float(np.abs(state.v.data).max())
    w_inf = float(np.abs(diag.w.data).max())
    denom = (
        params.mu * sig_max * k2
        + (params.mu + params.lam) * sig_max * kh2
        + params.nu * sig_max * kz2
        + params.epsilon * kh2
        + v_inf * math.sqrt(k2)
        + w_inf * np.pi * g.nz
    )
    return cfl / denom


def _lincomb(base: State, t: float, *terms) -> State:
    """base + sum coef * tendency, with the given new time."""
    v = base.v.data.copy()
    s = base.sigma.data.copy()
    p = base.p.data.copy()
    for coef, tend in terms:
        v += coef * tend.dv.data
        s += coef * tend.dsigma.data
        p += coef * tend.dp.data
    g = base.grid
    return State(
        VectorField3D2C(g, v, base.v.parity),
        ScalarField3D(g, s, base.sigma.parity),
        ScalarField2D(g, p),
        t=t,
    )


def _with_forcing(tend: StateTendency, forcing, t: float, grid) -> StateTendency:
    if forcing is None:
        return tend
    fv, fs, fp = forcing(t)
    return StateTendency(
        dv=VectorField3D2C(grid, tend.dv.data + fv, tend.dv.parity),
        dsigma=ScalarField3D(grid, tend.dsigma.data + fs, tend.dsigma.parity),
        dp=ScalarField2D(grid, tend.dp.data + fp),
    )


def _state_l2(state: State) -> float:
    return float(
        np.linalg.norm(state.v.data) + np.linalg.norm(state.sigma.data)
    )


def advance(
    state: State,
    params: PhysParams,
    opts: RunOptions,
    forcing=None,
) -> AdvanceResult:
    """RK4 to t_final with the energy monitor; partial results survive faults.

    ``forcing``: optional callable t -> (fv, fsigma, fp) nodal arrays added
    to the tendency (used by manufactured-solution runs).
    """
    dt = opts.dt if opts.dt is not None else stable_dt(state, params, opts.cfl)
    n_steps = max(1, math.ceil(opts.t_final / dt - 1e-12))
    dt = opts.t_final / n_steps

    reports: list[EnergyReport] = []
    states: list[State] | None = [state] if opts.keep_states else None
    warn_log: list[str] = []
    diss_v = 0.0
    diss_dz = 0.0
    fault: CpeError | None = None

    def rhs(s: State) -> StateTendency:
        return _with_forcing(
            regularized_tendency(s, params, fault_floor=opts.fault_floor),
            forcing,
            s.t,
            s.grid,
        )

    def record(s: State):
        diag = compute_diagnostics(s, params)
        w_def, phi_def = boundary_defects(diag)
        reports.append(
            energy_report(
                s,
                params,
                diss_v,
                diss_dz,
                mass=total_mass(s.sigma),
                w_defect=w_def,
                phi_defect=phi_def,
            )
        )

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        record(state)
        for n in range(n_steps):
            t = state.t
            try:
                diss_v += dt * sobolev_norm(state.v, 4) ** 2
                diss_dz += dt * sobolev_norm(ddz(state.sigma), 2) ** 2
                k1 = rhs(state)
                s1 = _lincomb(state, t + 0.5 * dt, (0.5 * dt, k1))
                k2 = rhs(s1)
                s2 = _lincomb(state, t + 0.5 * dt, (0.5 * dt, k2))
                k3 = rhs(s2)
                s3 = _lincomb(state, t + dt, (dt, k3))
                k4 = rhs(s3)
                new_state = _lincomb(
                    state,
                    t + dt,
                    (dt / 6.0, k1),
                    (dt / 3.0, k2),
                    (dt / 3.0, k3),
                    (dt / 6.0, k4),
                )
                before, after = _state_l2(state), _state_l2(new_state)
                if not np.isfinite(after) or after > 10.0 * max(before, 1e-300):
                    raise StabilityFault(
                        f"norm grew {before:.3e} -> {after:.3e} in step {n}"
                    )
                # the growth detector can miss a sign flip at modest norm,
                # so do not accept states the tendency would reject anyway
                check_positivity(new_state, params, opts.fault_floor)
                state = new_state
            except CpeError as exc:
                fault = exc
                break
            if states is not None:
                states.append(state)
            if (n + 1) % opts.record_every == 0 or n + 1 == n_steps:
                try:
                    record(state)
                except CpeError as exc:
                    fault = exc
                    break
        seen = set(warn_log)
        for w in caught:
            text = str(w.message)
            if text not in seen:
                seen.add(text)
                warn_log.append(text)

    return AdvanceResult(
        state=state,
        reports=reports,
        fault=fault,
        dt=dt,
        n_steps=n_steps,
        warnings=warn_log,
        states=states,
    )


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PicardReport:
    deltas: list[float]
    ratios: list[float]
    converged: bool
    iterations: int
    dt: float
    n_steps: int
    per_step_sampling: bool = False


@dataclass(frozen=True)
class PicardResult:
    state: State
    states: list[State]
    report: PicardReport


def _trajectory_delta(a: list[State], b: list[State]) -> float:
    worst = 0.0
    for sa, sb in zip(a, b):
        dv = VectorField3D2C(sa.grid, sa.v.data - sb.v.data, sa.v.parity)
        ds = ScalarField3D(sa.grid, sa.sigma.data - sb.sigma.data, sa.sigma.parity)
        dp = ScalarField2D(sa.grid, sa.p.data - sb.p.data)
        val = math.sqrt(
            sobolev_norm(dv, 3) ** 2
            + sobolev_norm(ds, 3) ** 2
            + sobolev_norm(dp, 3) ** 2
        )
        worst = max(worst, val)
    return worst


MEMORY_BUDGET_BYTES = 8e8


def picard_solve(
    initial: State,
    params: PhysParams,
    T: float,
    tol: float = 1e-9,
    max_iter: int = 30,
    dt: float | None = None,
    cfl: float = 1.0,
) -> PicardResult:
    """Iterate the frozen-coefficient solution map to its fixed point.

    Raises NoContraction (with the partial report attached) when three
    consecutive contraction ratios reach 1, when a linear sweep goes
    unstable, or when max_iter sweeps do not reach tol — all signatures of
    a horizon T too large for the contraction mechanism.
    """
    if dt is None:
        dt = stable_dt(initial, params, cfl)
    n_steps = max(1, math.ceil(T / dt - 1e-12))
    dt = T / n_steps

    state_bytes = (
        initial.v.data.nbytes + initial.sigma.data.nbytes + initial.p.data.nbytes
    )
    per_step = 4 * n_steps * state_bytes > MEMORY_BUDGET_BYTES

    # sweep 0: the constant-in-time trajectory at the initial data
    records: list[list[State]] = [[initial] * 4 for _ in range(n_steps)]
    prev_states: list[State] = [initial] * (n_steps + 1)

    deltas: list[float] = []
    ratios: list[float] = []

    def make_report(converged: bool, iterations: int) -> PicardReport:
        return PicardReport(
            deltas=list(deltas),
            ratios=list(ratios),
            converged=converged,
            iterations=iterations,
            dt=dt,
            n_steps=n_steps,
            per_step_sampling=per_step,
        )

    for sweep in range(1, max_iter + 1):
        source_cache: dict[int, tuple] = {}

        def sampler(step: int, stage: int, t: float):
            rec = records[step][0 if per_step else stage]
            hit = source_cache.get(id(rec))
            if hit is None:
                n1, n2, n3 = frozen_sources(rec, params)
                hit = (rec.sigma, n1, n2, n3)
                source_cache[id(rec)] = hit
            return hit

        try:
            new_records, new_states = advance_coupled_linear(
                initial, params, dt, n_steps, sampler, record_stages=not per_step
            )
        except CpeError as exc:
            raise NoContraction(
                f"linear sweep {sweep} failed: {exc}", make_report(False, sweep)
            ) from exc

        d = _trajectory_delta(new_states, prev_states)
        deltas.append(d)
        if len(deltas) >= 2:
            prev = deltas[-2]
            ratios.append(d / prev if prev > 0 else 0.0)
        records = new_records
        prev_states = new_states

        if d <= tol:
            return PicardResult(
                state=new_states[-1],
                states=new_states,
                report=make_report(True, sweep),
            )
        if len(ratios) >= 3 and all(r >= 1.0 for r in ratios[-3:]):
            raise NoContraction(
                f"ratios {ratios[-3:]} show no contraction at T={T:g}",
                make_report(False, sweep),
            )

    raise NoContraction(
        f"no convergence to {tol:g} within {max_iter} sweeps at T={T:g}",
        make_report(False, max_iter),
    )
