"""Binary state snapshots.

Layout: a 76-byte header (magic "CPE1", format version, grid sizes, time,
physical constants) followed by raw little-endian float64 payloads for v1,
v2, sigma (x-fastest, then y, then z) and p (x-fastest, then y). Round
trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatFault, IoFault
from .fields import COS, ScalarField2D, ScalarField3D, State, VectorField3D2C
from .grid import Grid
from .params import PhysParams

MAGIC = b"CPE1"
VERSION = 1
_HEADER = struct.Struct("<4s4I7d")


@dataclass(frozen=True)
class Snapshot:
    state: State
    params: PhysParams


def _x_fastest(a: np.ndarray) -> bytes:
    # stored (x, y, z) C-order means z varies fastest; flip axes so the
    # serialized stream runs x, then y, then z
    return np.ascontiguousarray(a.transpose(range(a.ndim - 1, -1, -1))).tobytes()


def _from_x_fastest(buf: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    rev = buf.reshape(shape[::-1])
    return np.ascontiguousarray(rev.transpose(range(rev.ndim - 1, -1, -1)))


def snapshot_bytes(snap: Snapshot) -> bytes:
    g = snap.state.grid
    p = snap.params
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        g.nx,
        g.ny,
        g.nz,
        snap.state.t,
        p.gamma,
        p.mu,
        p.lam,
        p.kappa,
        p.R,
        p.epsilon,
    )
    return b"".join(
        (
            header,
            _x_fastest(snap.state.v.data[0]),
            _x_fastest(snap.state.v.data[1]),
            _x_fastest(snap.state.sigma.data),
            _x_fastest(snap.state.p.data),
        )
    )


def parse_snapshot(data: bytes) -> Snapshot:
    if len(data) < _HEADER.size:
        raise FormatFault("truncated header", offset=len(data))
    magic, version, nx, ny, nz, t, gamma, mu, lam, kappa, R, eps = _HEADER.unpack_from(
        data
    )
    if magic != MAGIC:
        raise FormatFault(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatFault(f"unsupported version {version}", offset=4)
    grid = Grid(nx, ny, nz)
    n3 = nx * ny * (nz + 1)
    n2 = nx * ny
    expected = _HEADER.size + 8 * (3 * n3 + n2)
    if len(data) != expected:
        raise FormatFault(
            f"payload length {len(data)} != expected {expected}",
            offset=min(len(data), expected),
        )
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    s3 = (nx, ny, nz + 1)
    v1 = _from_x_fastest(flat[:n3], s3)
    v2 = _from_x_fastest(flat[n3 : 2 * n3], s3)
    sig = _from_x_fastest(flat[2 * n3 : 3 * n3], s3)
    p2 = _from_x_fastest(flat[3 * n3 :], (nx, ny))
    state = State(
        VectorField3D2C(grid, np.stack([v1, v2]), COS),
        ScalarField3D(grid, sig, COS),
        ScalarField2D(grid, p2),
        t=t,
    )
    return Snapshot(
        state=state,
        params=PhysParams(gamma=gamma, mu=mu, lam=lam, kappa=kappa, R=R, epsilon=eps),
    )


def write_snapshot(path, snap: Snapshot) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(snapshot_bytes(snap))
    except OSError as exc:
        raise IoFault(f"writing {path}: {exc}") from exc


def read_snapshot(path) -> Snapshot:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFault(f"reading {path}: {exc}") from exc
    return parse_snapshot(data)


def describe(snap: Snapshot) -> str:
    g = snap.state.grid
    p = snap.params
    return (
        f"CPE1 v{VERSION}  grid {g.nx}x{g.ny}x{g.nz}  t={snap.state.t:.17g}\n"
        f"gamma={p.gamma:.17g} mu={p.mu:.17g} lambda={p.lam:.17g} "
        f"kappa={p.kappa:.17g} R={p.R:.17g} epsilon={p.epsilon:.17g}"
    )
