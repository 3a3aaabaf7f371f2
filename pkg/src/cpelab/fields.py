"""Field containers: nodal real values plus a vertical-parity tag.

The parity tag records how a 3D field extends across z = 0:

* ``"cos"``  — even extension; a cosine series in z (v, sigma, Q, phi, ...).
* ``"sin"``  — odd extension; a sine series, zero at z in {0, 1} (w, ddz of
  cosine fields). Stored nodally including the boundary planes.
* ``"zlin"`` — a0(x, y) * z plus a sine series (cumulative z-integrals).
  Sines vanish at z = 1, so the slope a0 is recoverable from the nodal data.

Operations that transform in z dispatch on the tag; mixing "cos" with the
odd tags in arithmetic is a usage error (no equation term ever needs it).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalFault, UsageFault
from .grid import Grid

COS = "cos"
SIN = "sin"
ZLIN = "zlin"

_PARITIES = (COS, SIN, ZLIN)


def _check(data: np.ndarray, shape: tuple, what: str) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.shape != shape:
        raise UsageFault(f"{what}: expected shape {shape}, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise NumericalFault(f"{what}: non-finite values")
    return data


def _add_parity(a: str, b: str) -> str:
    if a == b:
        return a
    if {a, b} == {SIN, ZLIN}:
        return ZLIN
    raise UsageFault(f"cannot combine parities {a!r} and {b!r}")


@dataclass(frozen=True)
class ScalarField3D:
    grid: Grid
    data: np.ndarray
    parity: str = COS

    def __post_init__(self):
        if self.parity not in _PARITIES:
            raise UsageFault(f"unknown parity {self.parity!r}")
        object.__setattr__(
            self, "data", _check(self.data, self.grid.shape3d, "ScalarField3D")
        )

    def __add__(self, other: "ScalarField3D") -> "ScalarField3D":
        _same_grid(self, other)
        return ScalarField3D(
            self.grid, self.data + other.data, _add_parity(self.parity, other.parity)
        )

    def __sub__(self, other: "ScalarField3D") -> "ScalarField3D":
        _same_grid(self, other)
        return ScalarField3D(
            self.grid, self.data - other.data, _add_parity(self.parity, other.parity)
        )

    def __mul__(self, c: float) -> "ScalarField3D":
        return replace(self, data=self.data * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField3D":
        return replace(self, data=-self.data)


@dataclass(frozen=True)
class VectorField3D2C:
    """Two horizontal components of a 3D velocity field."""

    grid: Grid
    data: np.ndarray  # (2, nx, ny, nz+1)
    parity: str = COS

    def __post_init__(self):
        if self.parity not in _PARITIES:
            raise UsageFault(f"unknown parity {self.parity!r}")
        object.__setattr__(
            self, "data", _check(self.data, (2, *self.grid.shape3d), "VectorField3D2C")
        )

    def component(self, i: int) -> ScalarField3D:
        return ScalarField3D(self.grid, self.data[i], self.parity)

    def __add__(self, other: "VectorField3D2C") -> "VectorField3D2C":
        _same_grid(self, other)
        return VectorField3D2C(
            self.grid, self.data + other.data, _add_parity(self.parity, other.parity)
        )

    def __sub__(self, other: "VectorField3D2C") -> "VectorField3D2C":
        _same_grid(self, other)
        return VectorField3D2C(
            self.grid, self.data - other.data, _add_parity(self.parity, other.parity)
        )

    def __mul__(self, c: float) -> "VectorField3D2C":
        return replace(self, data=self.data * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField3D2C":
        return replace(self, data=-self.data)


@dataclass(frozen=True)
class ScalarField2D:
    """A field on T^2 only (pressure, vertical averages)."""

    grid: Grid
    data: np.ndarray  # (nx, ny)

    def __post_init__(self):
        object.__setattr__(
            self, "data", _check(self.data, self.grid.shape2d, "ScalarField2D")
        )

    def __add__(self, other: "ScalarField2D") -> "ScalarField2D":
        _same_grid(self, other)
        return ScalarField2D(self.grid, self.data + other.data)

    def __sub__(self, other: "ScalarField2D") -> "ScalarField2D":
        _same_grid(self, other)
        return ScalarField2D(self.grid, self.data - other.data)

    def __mul__(self, c: float) -> "ScalarField2D":
        return ScalarField2D(self.grid, self.data * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField2D":
        return ScalarField2D(self.grid, -self.data)


def _same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise UsageFault("fields live on different grids")


Field = ScalarField3D | VectorField3D2C | ScalarField2D


@dataclass(frozen=True)
class State:
    """The unknowns (v, sigma, p) at one instant."""

    v: VectorField3D2C
    sigma: ScalarField3D
    p: ScalarField2D
    t: float = 0.0

    def __post_init__(self):
        if not (self.v.grid == self.sigma.grid == self.p.grid):
            raise UsageFault("state components live on different grids")
        if self.v.parity != COS or self.sigma.parity != COS:
            raise UsageFault("state fields must be cosine-parity (Neumann)")

    @property
    def grid(self) -> Grid:
        return self.v.grid


def constant_state(grid: Grid, v=(0.0, 0.0), sigma=1.0, p=1.0, t=0.0) -> State:
    vdata = np.empty((2, *grid.shape3d))
    vdata[0] = v[0]
    vdata[1] = v[1]
    return State(
        VectorField3D2C(grid, vdata),
        ScalarField3D(grid, np.full(grid.shape3d, float(sigma))),
        ScalarField2D(grid, np.full(grid.shape2d, float(p))),
        t=t,
    )
