"""Sobolev norms and the per-record energy monitor.

H^k is the derivative-sum form ||f||^2 = sum_{|alpha|<=k} ||D^alpha f||_2^2
with spectral derivatives and exact quadrature of the band-limited
integrands (Parseval in all three directions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .errors import UsageFault
from .fields import COS, ScalarField2D, ScalarField3D, VectorField3D2C
from .spectral import spectrum


def _parseval_weight_2d(grid) -> np.ndarray:
    wy = np.full(grid.ny // 2 + 1, 2.0)
    wy[0] = 1.0
    return (2.0 * np.pi) ** 2 * wy[None, :]


def _parseval_weight_z(grid, parity: str, nmodes: int) -> np.ndarray:
    if parity == COS:
        wz = np.full(nmodes, 2.0)
        wz[0] = 1.0
    else:
        wz = np.full(nmodes, 2.0)
    return wz


def _scalar_sq_norm(field, k: int) -> float:
    g = field.grid
    spec = spectrum(field)
    power = np.abs(spec) ** 2
    kx2 = (g.kx ** 2)[:, None]
    ky2 = (g.ky_half ** 2)[None, :]
    if power.ndim == 2:
        power *= _parseval_weight_2d(g)
        total = 0.0
        for a, b in iproduct(range(k + 1), repeat=2):
            if a + b > k:
                continue
            total += float(np.sum(power * kx2 ** a * ky2 ** b))
        return total
    nmodes = power.shape[-1]
    m = np.arange(nmodes) if field.parity == COS else np.arange(1, nmodes + 1)
    mz2 = ((np.pi * m) ** 2)[None, None, :]
    power *= _parseval_weight_2d(g)[..., None]
    power *= _parseval_weight_z(g, field.parity, nmodes)[None, None, :]
    total = 0.0
    for a, b, c in iproduct(range(k + 1), repeat=3):
        if a + b + c > k:
            continue
        total += float(
            np.sum(power * kx2[..., None] ** a * ky2[..., None] ** b * mz2 ** c)
        )
    return total


def sobolev_norm(field, k: int) -> float:
    """||f||_{H^k} over the field's own domain (channel for 3D, torus for 2D)."""
    if not 0 <= k <= 4:
        raise UsageFault(f"sobolev_norm supports k in 0..4, got {k}")
    if isinstance(field, VectorField3D2C):
        return float(
            np.sqrt(sum(_scalar_sq_norm(field.component(i), k) for i in range(2)))
        )
    if isinstance(field, (ScalarField3D, ScalarField2D)):
        return float(np.sqrt(_scalar_sq_norm(field, k)))
    raise UsageFault(f"sobolev_norm: unsupported field type {type(field).__name__}")


@dataclass(frozen=True)
class EnergyReport:
    """One row of the energy monitor.

    energy = ||v||_{H3}^2 + ||sigma||_{H2}^2 + ||p||_{H3}^2; the two diss_*
    entries are running time integrals (left-rectangle) of ||v||_{H4}^2 and
    ||dz sigma||_{H2}^2 and are nondecreasing along a trajectory.
    """

    t: float
    energy: float
    diss_v: float
    diss_dzsigma: float
    min_sigma: float
    min_p: float
    mass: float
    w_defect: float
    phi_defect: float


def energy_report(
    state,
    params,
    diss_v: float,
    diss_dzsigma: float,
    *,
    mass: float,
    w_defect: float,
    phi_defect: float,
) -> EnergyReport:
    e = (
        sobolev_norm(state.v, 3) ** 2
        + sobolev_norm(state.sigma, 2) ** 2
        + sobolev_norm(state.p, 3) ** 2
    )
    return EnergyReport(
        t=state.t,
        energy=e,
        diss_v=diss_v,
        diss_dzsigma=diss_dzsigma,
        min_sigma=float(state.sigma.data.min()),
        min_p=float(state.p.data.min()),
        mass=mass,
        w_defect=w_defect,
        phi_defect=phi_defect,
    )


def log_energy_slope(reports) -> float:
    """Least-squares slope of log E(t); finite growth rate along a trajectory."""
    ts = np.array([r.t for r in reports])
    es = np.array([r.energy for r in reports])
    if len(ts) < 2 or np.any(es <= 0):
        return 0.0
    return float(np.polyfit(ts, np.log(es), 1)[0])


def difference_norm(a, b) -> float:
    """H1 x L2 x H1 size of the gap between two states (the norm the
    uniqueness/continuous-dependence estimates are phrased in)."""
    g = a.grid
    dv = VectorField3D2C(g, a.v.data - b.v.data, a.v.parity)
    ds = ScalarField3D(g, a.sigma.data - b.sigma.data, a.sigma.parity)
    dp = ScalarField2D(g, a.p.data - b.p.data)
    return math.sqrt(
        sobolev_norm(dv, 1) ** 2
        + sobolev_norm(ds, 0) ** 2
        + sobolev_norm(dp, 1) ** 2
    )
