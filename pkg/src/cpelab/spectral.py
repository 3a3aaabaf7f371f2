"""Spectral transforms, derivatives, vertical calculus, dealiased products.

Conventions
-----------
Horizontal: real FFT over (x, y), ``norm="forward"`` so spectral entries are
mode amplitudes (padding-invariant). Vertical: DCT-I over the nz+1 nodes for
cosine-parity data, DST-I over the nz-1 interior nodes for sine-parity data,
both scaled by 1/(2 nz) on analysis so synthesis is the bare kernel (again
padding-invariant). Horizontal Nyquist rows/columns and the vertical mode
m = nz are zeroed by every analysis.

Products are formed on a 3/2 zero-padded grid in all directions and
truncated back. Factors are padded in their own parity basis: sine-type
fields resampled through a cosine transform would pick up O(1/nz) Gibbs
error from the corner of their even extension, which is far above the
accuracy this module promises.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .errors import NumericalFault, UsageFault
from .fields import COS, SIN, ZLIN, ScalarField2D, ScalarField3D, VectorField3D2C
from .grid import Grid, fft_workers

# ---------------------------------------------------------------------------
# low-level kernels
# ---------------------------------------------------------------------------


def _dct1(a: np.ndarray) -> np.ndarray:
    return sfft.dct(a, type=1, axis=-1, workers=fft_workers())


def _dst1(a: np.ndarray) -> np.ndarray:
    return sfft.dst(a, type=1, axis=-1, workers=fft_workers())


def _rfft2(a: np.ndarray) -> np.ndarray:
    return sfft.rfft2(a, axes=(0, 1), norm="forward", workers=fft_workers())


def _irfft2(a: np.ndarray, s: tuple[int, int]) -> np.ndarray:
    return sfft.irfft2(a, s=s, axes=(0, 1), norm="forward", workers=fft_workers())


def _zero_h_nyquist(spec: np.ndarray, nx: int, ny: int) -> np.ndarray:
    spec[nx // 2] = 0.0
    spec[:, ny // 2] = 0.0
    return spec


def cos_coeffs(a: np.ndarray, nz: int) -> np.ndarray:
    """Cosine-mode amplitudes c[..., m], f_j = c_0 + 2 sum c_m cos + (-1)^j c_nz."""
    c = _dct1(a) / (2.0 * nz)
    c[..., nz] = 0.0  # vertical Nyquist
    return c


def cos_nodal(c: np.ndarray) -> np.ndarray:
    return _dct1(c)


def sin_coeffs(a: np.ndarray, nz: int) -> np.ndarray:
    """Sine-mode amplitudes s[..., m-1] for modes m = 1..nz-1 (interior data)."""
    return _dst1(a[..., 1:-1]) / (2.0 * nz)


def sin_nodal(s: np.ndarray) -> np.ndarray:
    out = np.zeros(s.shape[:-1] + (s.shape[-1] + 2,))
    out[..., 1:-1] = _dst1(s)
    return out


# ---------------------------------------------------------------------------
# full 3D / 2D spectra (used by norms, round-trip tests, band projections)
# ---------------------------------------------------------------------------


def spectrum(field) -> np.ndarray:
    """Complex mode amplitudes; z axis holds cosine or sine coefficients."""
    g = field.grid
    if isinstance(field, ScalarField2D):
        return _zero_h_nyquist(_rfft2(field.data), g.nx, g.ny)
    if isinstance(field, ScalarField3D):
        if field.parity == COS:
            zc = cos_coeffs(field.data, g.nz)
        elif field.parity == SIN:
            zc = sin_coeffs(field.data, g.nz)
        else:
            raise UsageFault("spectrum of a zlin field is not single-basis")
        return _zero_h_nyquist(_rfft2(zc), g.nx, g.ny)
    raise UsageFault(f"spectrum: unsupported field type {type(field).__name__}")


def field_from_spectrum(grid: Grid, spec: np.ndarray, parity: str = COS):
    if spec.ndim == 2:
        return ScalarField2D(grid, _irfft2(spec, (grid.nx, grid.ny)))
    zc = _irfft2(spec, (grid.nx, grid.ny))
    if parity == COS:
        return ScalarField3D(grid, cos_nodal(zc), COS)
    if parity == SIN:
        return ScalarField3D(grid, sin_nodal(zc), SIN)
    raise UsageFault(f"cannot synthesize parity {parity!r}")


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


def _ddx_data(a: np.ndarray, g: Grid, axis_k) -> np.ndarray:
    spec = _rfft2(a)
    spec *= axis_k
    _zero_h_nyquist(spec, g.nx, g.ny)
    return _irfft2(spec, (g.nx, g.ny))


def _kx_mult(g: Grid, ndim: int):
    shape = [1] * ndim
    shape[0] = g.nx
    return (1j * g.kx).reshape(shape)


def _ky_mult(g: Grid, ndim: int):
    shape = [1] * ndim
    shape[1] = g.ky_half.size
    return (1j * g.ky_half).reshape(shape)


def ddx(f):
    """Spectral d/dx; works for 2D and 3D scalar fields, preserves parity."""
    g = f.grid
    data = _ddx_data(f.data, g, _kx_mult(g, f.data.ndim))
    if isinstance(f, ScalarField2D):
        return ScalarField2D(g, data)
    return ScalarField3D(g, data, f.parity)


def ddy(f):
    g = f.grid
    data = _ddx_data(f.data, g, _ky_mult(g, f.data.ndim))
    if isinstance(f, ScalarField2D):
        return ScalarField2D(g, data)
    return ScalarField3D(g, data, f.parity)


def _ddz_cos_data(a: np.ndarray, nz: int) -> np.ndarray:
    c = cos_coeffs(a, nz)
    m = np.arange(1, nz, dtype=float)
    s = -(np.pi * m) * c[..., 1:nz]
    return sin_nodal(s)


def _ddz_sin_data(a: np.ndarray, nz: int) -> np.ndarray:
    s = sin_coeffs(a, nz)
    m = np.arange(1, nz, dtype=float)
    c = np.zeros(a.shape)
    c[..., 1:nz] = (np.pi * m) * s
    return cos_nodal(c)


def ddz(f: ScalarField3D) -> ScalarField3D:
    """Spectral d/dz: cosine -> sine, sine -> cosine, zlin -> cosine (exact)."""
    g = f.grid
    if f.parity == COS:
        return ScalarField3D(g, _ddz_cos_data(f.data, g.nz), SIN)
    if f.parity == SIN:
        return ScalarField3D(g, _ddz_sin_data(f.data, g.nz), COS)
    # zlin: slope * z + sine part; sines vanish at both endpoints, so the
    # slope is the difference of the boundary planes.
    slope = f.data[..., -1] - f.data[..., 0]
    sine_part = f.data - slope[..., None] * f.grid.z_nodes
    out = _ddz_sin_data(sine_part, g.nz) + slope[..., None]
    return ScalarField3D(g, out, COS)


def dzz(f: ScalarField3D) -> ScalarField3D:
    """Second z-derivative of a cosine-parity field (stays cosine)."""
    if f.parity != COS:
        raise UsageFault("dzz expects a cosine-parity field")
    g = f.grid
    c = cos_coeffs(f.data, g.nz)
    c *= -((np.pi * g.mz) ** 2)
    return ScalarField3D(g, cos_nodal(c), COS)


def laplacian_h(f):
    """Horizontal Laplacian for 2D or 3D scalar fields."""
    g = f.grid
    spec = _rfft2(f.data)
    k2 = g.kx.reshape(-1, 1) ** 2 + g.ky_half.reshape(1, -1) ** 2
    if f.data.ndim == 3:
        k2 = k2[..., None]
    spec *= -k2
    _zero_h_nyquist(spec, g.nx, g.ny)
    data = _irfft2(spec, (g.nx, g.ny))
    if isinstance(f, ScalarField2D):
        return ScalarField2D(g, data)
    return ScalarField3D(g, data, f.parity)


def laplacian3(f: ScalarField3D) -> ScalarField3D:
    """Full Laplacian (horizontal + vertical) of a cosine-parity field."""
    return laplacian_h(f) + dzz(f)


def div_h(v: VectorField3D2C) -> ScalarField3D:
    return ddx(v.component(0)) + ddy(v.component(1))


def grad_h_2d(p: ScalarField2D) -> tuple[ScalarField2D, ScalarField2D]:
    return ddx(p), ddy(p)


# ---------------------------------------------------------------------------
# vertical average / fluctuation / cumulative integral
# ---------------------------------------------------------------------------


def vertical_average(f: ScalarField3D) -> ScalarField2D:
    r"""\bar f = \int_0^1 f dz, exact for the field's own interpolant."""
    g = f.grid
    if f.parity == COS:
        c = cos_coeffs(f.data, g.nz)
        return ScalarField2D(g, c[..., 0].copy())
    if f.parity == SIN:
        s = sin_coeffs(f.data, g.nz)
        m = np.arange(1, g.nz, dtype=float)
        w = 2.0 * (1.0 - (-1.0) ** m) / (np.pi * m)  # int_0^1 of 2 s_m sin(m pi z)
        return ScalarField2D(g, s @ w)
    slope = f.data[..., -1] - f.data[..., 0]
    sine_part = ScalarField3D(g, f.data - slope[..., None] * g.z_nodes, SIN)
    return ScalarField2D(g, 0.5 * slope) + vertical_average(sine_part)


def fluctuation(f: ScalarField3D) -> ScalarField3D:
    r"""\tilde f = f - \bar f (cosine parity only; others never need it)."""
    if f.parity != COS:
        raise UsageFault("fluctuation expects a cosine-parity field")
    mean = vertical_average(f)
    return ScalarField3D(f.grid, f.data - mean.data[..., None], COS)


def vertical_cumulative_integral(f: ScalarField3D) -> ScalarField3D:
    """F(z) = int_0^z f dz' per cosine mode: mode 0 -> a0*z, mode m -> sin/(m pi)."""
    if f.parity != COS:
        raise UsageFault("vertical_cumulative_integral expects cosine parity")
    g = f.grid
    c = cos_coeffs(f.data, g.nz)
    m = np.arange(1, g.nz, dtype=float)
    s = c[..., 1:g.nz] / (np.pi * m)
    data = sin_nodal(s)
    data += c[..., 0:1] * g.z_nodes
    return ScalarField3D(g, data, ZLIN)


# ---------------------------------------------------------------------------
# dealiased products
# ---------------------------------------------------------------------------


def _pad_h(spec: np.ndarray, g: Grid, fine_shape) -> np.ndarray:
    """Place a coarse horizontal spectrum into a fine one (Nyquist dropped)."""
    out = np.zeros(fine_shape, dtype=complex)
    hx = g.nx // 2
    hy = g.ny // 2
    out[:hx, :hy] = spec[:hx, :hy]
    out[-(hx - 1):, :hy] = spec[-(hx - 1):, :hy]
    return out


def _trunc_h(fine: np.ndarray, g: Grid, coarse_shape) -> np.ndarray:
    out = np.zeros(coarse_shape, dtype=complex)
    hx = g.nx // 2
    hy = g.ny // 2
    out[:hx, :hy] = fine[:hx, :hy]
    out[-(hx - 1):, :hy] = fine[-(hx - 1):, :hy]
    return out


class ProductWorkspace:
    """Memoizes fine-grid samples of factor fields within one RHS assembly.

    Keyed by the identity of the nodal array, so it must not outlive the
    fields it has seen. All methods are read-only with respect to inputs.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        # values keep a reference to the source array so its id stays valid
        self._fine3: dict[tuple[int, str], tuple[np.ndarray, np.ndarray]] = {}
        self._fine2: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # -- factor synthesis on the fine grid --

    def fine3(self, f: ScalarField3D) -> np.ndarray:
        odd = f.parity != COS
        key = (id(f.data), "s" if odd else "c")
        hit = self._fine3.get(key)
        if hit is not None:
            return hit[1]
        g = self.grid
        fx, fy, fz = g.fine_nx, g.fine_ny, g.fine_nz
        if odd:
            zc = sin_coeffs(f.data, g.nz)
            zfine = np.zeros((g.nx, g.ny, fz - 1))
            zfine[..., : g.nz - 1] = zc
        else:
            zc = cos_coeffs(f.data, g.nz)
            zfine = np.zeros((g.nx, g.ny, fz + 1))
            zfine[..., : g.nz] = zc[..., : g.nz]
        spec = _zero_h_nyquist(_rfft2(zfine), g.nx, g.ny)
        fine = _pad_h(spec, g, (fx, fy // 2 + 1, zfine.shape[-1]))
        nodal = _irfft2(fine, (fx, fy))
        nodal = sin_nodal(nodal) if odd else cos_nodal(nodal)
        self._fine3[key] = (f.data, nodal)
        return nodal

    def fine2(self, f: ScalarField2D) -> np.ndarray:
        key = id(f.data)
        hit = self._fine2.get(key)
        if hit is not None:
            return hit[1]
        g = self.grid
        spec = _zero_h_nyquist(_rfft2(f.data), g.nx, g.ny)
        fine = _pad_h(spec, g, (g.fine_nx, g.fine_ny // 2 + 1))
        nodal = _irfft2(fine, (g.fine_nx, g.fine_ny))
        self._fine2[key] = (f.data, nodal)
        return nodal

    # -- product analysis back to the coarse grid --

    def reduce3(self, fine_nodal: np.ndarray, odd: bool) -> ScalarField3D:
        g = self.grid
        fz = g.fine_nz
        if odd:
            zc = sin_coeffs(fine_nodal, fz)[..., : g.nz - 1]
        else:
            zc = cos_coeffs(fine_nodal, fz)[..., : g.nz + 1]
            zc[..., g.nz] = 0.0
        spec = _rfft2(zc)
        coarse = _trunc_h(spec, g, (g.nx, g.ny // 2 + 1, zc.shape[-1]))
        nodal = _irfft2(coarse, (g.nx, g.ny))
        if odd:
            return ScalarField3D(g, sin_nodal(nodal), SIN)
        return ScalarField3D(g, cos_nodal(nodal), COS)

    def reduce2(self, fine_nodal: np.ndarray) -> ScalarField2D:
        g = self.grid
        spec = _rfft2(fine_nodal)
        coarse = _trunc_h(spec, g, (g.nx, g.ny // 2 + 1))
        return ScalarField2D(g, _irfft2(coarse, (g.nx, g.ny)))


def _is_odd(f) -> bool:
    return isinstance(f, ScalarField3D) and f.parity in (SIN, ZLIN)


def _fine_factor(ws: ProductWorkspace, f):
    if isinstance(f, ScalarField3D):
        return ws.fine3(f)
    if isinstance(f, ScalarField2D):
        return ws.fine2(f)[..., None]
    raise UsageFault(f"cannot multiply a {type(f).__name__}")


def multiply_dealiased(f, g, ws: ProductWorkspace | None = None):
    """Pointwise product on the 3/2-padded grid, truncated back.

    Scalars short-circuit to exact scaling. 2D factors broadcast along z.
    The output parity follows the sine/cosine product table; "zlin" factors
    are analyzed in sine space (exact up to their linear-slope content,
    which for the vertical velocity is the roundoff-sized integral of phi).
    """
    if np.isscalar(f) or isinstance(f, (int, float)):
        return g * float(f)
    if np.isscalar(g) or isinstance(g, (int, float)):
        return f * float(g)
    if isinstance(f, VectorField3D2C) or isinstance(g, VectorField3D2C):
        vec, other = (f, g) if isinstance(f, VectorField3D2C) else (g, f)
        comps = [multiply_dealiased(vec.component(i), other, ws) for i in range(2)]
        return VectorField3D2C(
            vec.grid, np.stack([c.data for c in comps]), comps[0].parity
        )
    if f.grid != g.grid:
        raise UsageFault("product factors live on different grids")
    ws = ws or ProductWorkspace(f.grid)
    if isinstance(f, ScalarField2D) and isinstance(g, ScalarField2D):
        return ws.reduce2(ws.fine2(f) * ws.fine2(g))
    prod = _fine_factor(ws, f) * _fine_factor(ws, g)
    return ws.reduce3(prod, odd=_is_odd(f) != _is_odd(g))


def dealiased_sum(terms, ws: ProductWorkspace | None = None):
    """Sum of pointwise products sharing one output basis, one reduction.

    ``terms`` is an iterable of (f, g) or (f, g, coef) entries; every term
    must produce the same output kind (all 3D with one parity, or all 2D).
    Scalar coefficients multiply exactly and keep the factor fields
    memoizable across terms.
    """
    terms = [t if len(t) == 3 else (t[0], t[1], 1.0) for t in terms]
    if not terms:
        raise UsageFault("dealiased_sum needs at least one term")
    ws = ws or ProductWorkspace(terms[0][0].grid)
    two_d = all(
        isinstance(f, ScalarField2D) and isinstance(g, ScalarField2D)
        for f, g, _ in terms
    )
    if two_d:
        acc = None
        for f, g, c in terms:
            prod = c * (ws.fine2(f) * ws.fine2(g))
            acc = prod if acc is None else acc + prod
        return ws.reduce2(acc)
    odd_flags = {_is_odd(f) != _is_odd(g) for f, g, _ in terms}
    if len(odd_flags) != 1:
        raise UsageFault("dealiased_sum terms have mixed output parity")
    acc = None
    for f, g, c in terms:
        prod = c * (_fine_factor(ws, f) * _fine_factor(ws, g))
        acc = prod if acc is None else acc + prod
    return ws.reduce3(acc, odd=odd_flags.pop())


# ---------------------------------------------------------------------------
# band-limited random fields and projections
# ---------------------------------------------------------------------------


def band_project(f, band: tuple[int, int, int]):
    """Zero all modes with |kx| > bx, ky > by, or m > bz (and Nyquists)."""
    bx, by, bz = band
    g = f.grid
    spec = spectrum(f)
    kx = np.abs(g.kx)
    mask_x = kx <= bx
    mask_y = g.ky_half <= by
    if spec.ndim == 2:
        spec *= mask_x[:, None] * mask_y[None, :]
        return field_from_spectrum(g, spec)
    nzmodes = spec.shape[-1]
    mz = np.arange(nzmodes) if f.parity == COS else np.arange(1, nzmodes + 1)
    mask_z = mz <= bz
    spec *= mask_x[:, None, None] * mask_y[None, :, None] * mask_z[None, None, :]
    return field_from_spectrum(g, spec, f.parity)


def random_band_limited_3d(
    grid: Grid, rng: np.random.Generator, band: tuple[int, int, int]
) -> ScalarField3D:
    """Seeded, Neumann-compatible (cosine-basis) random field, unit-ish scale."""
    noise = ScalarField3D(grid, rng.standard_normal(grid.shape3d), COS)
    f = band_project(noise, band)
    peak = float(np.max(np.abs(f.data)))
    if peak == 0.0:
        raise NumericalFault("degenerate random field")
    return ScalarField3D(grid, f.data / peak, COS)


def random_band_limited_2d(
    grid: Grid, rng: np.random.Generator, band: tuple[int, int]
) -> ScalarField2D:
    noise = ScalarField2D(grid, rng.standard_normal(grid.shape2d))
    f = band_project(noise, (band[0], band[1], 0))
    peak = float(np.max(np.abs(f.data)))
    if peak == 0.0:
        raise NumericalFault("degenerate random field")
    return ScalarField2D(grid, f.data / peak)
