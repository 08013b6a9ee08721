"""Periodized grids, complex fields, spectral primitives, bumps and mollifiers.

The computational domain is the torus [0, L)^n sampled uniformly at
x_m = (L/N) m with m in {0..N-1}^n.  Spectra are Fourier-series
coefficients

    c_k = N^{-n} sum_m u(x_m) exp(-i <x_m, xi_k>),

attached to the frequency lattice xi_k = (2 pi / L) k with
-N/2 <= k_i < N/2, stored in FFT index order.  The discrete Parseval
identity (L/N)^n sum_m |u(x_m)|^2 = L^n sum_k |c_k|^2 holds exactly,
so the discrete L^2 norm used throughout is the quadrature rule
((L/N)^n sum |u|^2)^{1/2}.

Compactly supported objects (bumps, mollifier kernels) must fit strictly
inside one period so that torus sums reproduce their whole-space
counterparts.
"""

from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import FieldFormatError, GridError, ResolutionError, ShapeError

__all__ = [
    "DEFAULT_PERIOD",
    "GridSpec",
    "Field",
    "Window",
    "Mollifier",
    "make_grid",
    "coordinate_axes",
    "frequency_axes",
    "frequency_mesh",
    "constant_field",
    "plane_wave",
    "field_from_values",
    "to_spectrum",
    "from_spectrum",
    "l2_norm",
    "sup_norm",
    "translate",
    "pointwise_mul",
    "pointwise_apply",
    "smooth_step",
    "make_bump",
    "window_from_samples",
    "make_mollifier",
    "mollifier_kernel",
    "rescaled",
    "min_resolvable_epsilon",
    "mollify",
    "save_field",
    "load_field",
]

DEFAULT_PERIOD = 2.0 * math.pi

_MAGIC = b"FLD1"
_FORMAT_VERSION = 1
_MAX_DIM = 8
_MAX_POINTS = 1 << 27  # refuse to allocate absurd sample counts
_MIN_KERNEL_SAMPLES = 8


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: `dim` axes, `samples_per_axis` points each.

    `blocks` partitions the axes, in order, into contiguous groups; the
    group sizes drive the block weights used by the Sobolev machinery.
    """

    dim: int
    samples_per_axis: int
    period: float = DEFAULT_PERIOD
    blocks: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.dim < 1 or self.dim > _MAX_DIM:
            raise GridError(f"dim must be in 1..{_MAX_DIM}, got {self.dim}")
        n = self.samples_per_axis
        if n < 2 or n % 2 != 0:
            raise GridError(f"samples_per_axis must be even and >= 2, got {n}")
        if not (self.period > 0.0) or not math.isfinite(self.period):
            raise GridError(f"period must be positive and finite, got {self.period}")
        if n**self.dim > _MAX_POINTS:
            raise GridError(f"grid with {n}^{self.dim} points exceeds the supported size")
        blocks = tuple(int(b) for b in self.blocks) or (self.dim,)
        object.__setattr__(self, "blocks", blocks)
        if any(b < 1 for b in blocks) or sum(blocks) != self.dim:
            raise GridError(f"blocks {blocks} must be positive and sum to dim={self.dim}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_axis,) * self.dim

    @property
    def num_points(self) -> int:
        return self.samples_per_axis**self.dim

    @property
    def spacing(self) -> float:
        return self.period / self.samples_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def block_axes(self) -> tuple[tuple[int, ...], ...]:
        out, start = [], 0
        for b in self.blocks:
            out.append(tuple(range(start, start + b)))
            start += b
        return tuple(out)


def make_grid(
    dim: int,
    samples_per_axis: int,
    period: float = DEFAULT_PERIOD,
    blocks: Sequence[int] | None = None,
) -> GridSpec:
    """Validated constructor for :class:`GridSpec`."""
    return GridSpec(dim, samples_per_axis, period, tuple(blocks) if blocks else ())


@functools.lru_cache(maxsize=128)
def coordinate_axes(spec: GridSpec) -> tuple[np.ndarray, ...]:
    """Per-axis sample coordinates (L/N) m, read-only."""
    x = spec.spacing * np.arange(spec.samples_per_axis)
    x.flags.writeable = False
    return (x,) * spec.dim


@functools.lru_cache(maxsize=128)
def frequency_axes(spec: GridSpec) -> tuple[np.ndarray, ...]:
    """Per-axis frequencies (2 pi / L) k in FFT order, -N/2 <= k < N/2."""
    n = spec.samples_per_axis
    f = (2.0 * math.pi / spec.period) * np.fft.fftfreq(n, d=1.0 / n)
    f.flags.writeable = False
    return (f,) * spec.dim


@functools.lru_cache(maxsize=64)
def frequency_mesh(spec: GridSpec) -> np.ndarray:
    """Stacked frequency meshes, shape (dim, N, ..., N), read-only."""
    axes = frequency_axes(spec)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"))
    mesh.flags.writeable = False
    return mesh


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a :class:`GridSpec`."""

    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != self.spec.shape:
            raise ShapeError(f"samples shape {arr.shape} does not match grid shape {self.spec.shape}")
        object.__setattr__(self, "samples", arr)


def field_from_values(spec: GridSpec, values: np.ndarray) -> Field:
    return Field(spec, values)


def constant_field(spec: GridSpec, value: complex = 1.0) -> Field:
    return Field(spec, np.full(spec.shape, value, dtype=np.complex128))


def plane_wave(spec: GridSpec, k: Sequence[int] | int) -> Field:
    """exp(i <xi_k, x>) for an integer mode vector k."""
    kvec = np.atleast_1d(np.asarray(k, dtype=float))
    if kvec.shape != (spec.dim,):
        raise ShapeError(f"mode vector must have length {spec.dim}")
    coords = coordinate_axes(spec)
    phase = np.zeros(spec.shape, dtype=float)
    scale = 2.0 * math.pi / spec.period
    for axis in range(spec.dim):
        shape = [1] * spec.dim
        shape[axis] = -1
        phase = phase + scale * kvec[axis] * coords[axis].reshape(shape)
    return Field(spec, np.exp(1j * phase))


def to_spectrum(field: Field) -> np.ndarray:
    """Fourier-series coefficients c_k in FFT order."""
    return np.fft.fftn(field.samples) / field.spec.num_points


def from_spectrum(spec: GridSpec, coeffs: np.ndarray) -> Field:
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != spec.shape:
        raise ShapeError(f"coefficient shape {coeffs.shape} does not match grid shape {spec.shape}")
    return Field(spec, np.fft.ifftn(coeffs) * spec.num_points)


def l2_norm(field: Field) -> float:
    """Discrete L^2 norm ((L/N)^n sum |u|^2)^{1/2}."""
    return float(math.sqrt(field.spec.cell_volume * float(np.sum(np.abs(field.samples) ** 2))))


def sup_norm(field: Field) -> float:
    return float(np.max(np.abs(field.samples)))


def _as_shift_vector(spec: GridSpec, y: Sequence[float] | float) -> np.ndarray:
    yvec = np.atleast_1d(np.asarray(y, dtype=float))
    if yvec.shape != (spec.dim,):
        raise ShapeError(f"translation vector must have length {spec.dim}")
    return np.mod(yvec, spec.period)


def translate(field: Field, y: Sequence[float] | float) -> Field:
    """Translate u to u(. - y).

    For y on the sample lattice this is an exact cyclic index shift;
    otherwise the shift acts by spectral modulation, which agrees with the
    lattice path to rounding error and composes as a group action.
    """
    spec = field.spec
    yvec = _as_shift_vector(spec, y)
    steps = yvec / spec.spacing
    rounded = np.rint(steps)
    if np.all(np.abs(steps - rounded) <= 1e-9):
        shifts = tuple(int(r) % spec.samples_per_axis for r in rounded)
        return Field(spec, np.roll(field.samples, shifts, axis=tuple(range(spec.dim))))
    mesh = frequency_mesh(spec)
    phase = np.tensordot(yvec, mesh, axes=(0, 0))
    return from_spectrum(spec, to_spectrum(field) * np.exp(-1j * phase))


def pointwise_mul(f: Field, g: Field) -> Field:
    if f.spec != g.spec:
        raise ShapeError("pointwise product requires identical grids")
    return Field(f.spec, f.samples * g.samples)


def pointwise_apply(f: Field, fn: Callable[[np.ndarray], np.ndarray]) -> Field:
    return Field(f.spec, np.asarray(fn(f.samples), dtype=np.complex128))


# ---------------------------------------------------------------------------
# smooth bumps


def smooth_step(t: np.ndarray | float) -> np.ndarray:
    """C^infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1.

    Built from psi(t) = exp(-1/t) as psi(t) / (psi(t) + psi(1-t)).
    """
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(tc > 0.0, np.exp(-1.0 / np.maximum(tc, 1e-300)), 0.0)
        b = np.where(tc < 1.0, np.exp(-1.0 / np.maximum(1.0 - tc, 1e-300)), 0.0)
    return a / (a + b)


def _canonical_profile(t: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1-t^2)) on |t| < 1, exactly 0 outside; peak value 1."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    tsq = np.where(inside, t * t, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        vals = np.exp(1.0 - 1.0 / (1.0 - tsq))
    out[inside] = vals[inside]
    return out


def axis_bump_values(
    x: np.ndarray,
    lo: float,
    hi: float,
    plateau: tuple[float, float] | None = None,
) -> np.ndarray:
    """One-axis bump profile on (lo, hi), optionally 1 on the plateau."""
    x = np.asarray(x, dtype=float)
    if plateau is None:
        return _canonical_profile((2.0 * x - lo - hi) / (hi - lo))
    plo, phi = plateau
    rise = smooth_step((x - lo) / (plo - lo))
    fall = smooth_step((hi - x) / (hi - phi))
    vals = rise * fall
    return np.where((x > lo) & (x < hi), vals, 0.0)


@dataclass(frozen=True, eq=False)
class Window:
    """Compactly supported smooth cutoff stored as a field.

    `support_box` holds per-axis (lo, hi) in physical coordinates; boxes may
    wrap around the torus but must be shorter than one period per axis.
    """

    field: Field
    support_box: tuple[tuple[float, float], ...]
    profile_id: str = "plateau"

    def __post_init__(self) -> None:
        if len(self.support_box) != self.field.spec.dim:
            raise ShapeError("support_box must list one (lo, hi) pair per axis")
        for lo, hi in self.support_box:
            if not hi > lo or hi - lo >= self.field.spec.period:
                raise GridError(f"support interval ({lo}, {hi}) must be shorter than one period")

    @property
    def spec(self) -> GridSpec:
        return self.field.spec


def make_bump(
    spec: GridSpec,
    support_box: Sequence[tuple[float, float]],
    plateau_box: Sequence[tuple[float, float]] | None = None,
) -> Window:
    """Tensor-product bump supported strictly inside the fundamental cell.

    Without a plateau the per-axis profile is the canonical bump
    exp(1 - 1/(1-t^2)); with one, a smooth-step rise/fall that is exactly 1
    on the plateau box.  Samples vanish exactly outside the support box.
    """
    support = tuple((float(lo), float(hi)) for lo, hi in support_box)
    if len(support) != spec.dim:
        raise ShapeError(f"need {spec.dim} support intervals, got {len(support)}")
    for lo, hi in support:
        if not (0.0 < lo < hi < spec.period):
            raise GridError(f"support interval ({lo}, {hi}) must lie strictly inside (0, {spec.period})")
    plateaus: tuple[tuple[float, float], ...] | None = None
    if plateau_box is not None:
        plateaus = tuple((float(a), float(b)) for a, b in plateau_box)
        if len(plateaus) != spec.dim:
            raise ShapeError("plateau_box must list one interval per axis")
        for (lo, hi), (plo, phi) in zip(support, plateaus):
            if not (lo < plo <= phi < hi):
                raise GridError(f"plateau ({plo}, {phi}) must nest strictly inside support ({lo}, {hi})")

    coords = coordinate_axes(spec)
    samples = np.ones(spec.shape, dtype=float)
    for axis in range(spec.dim):
        lo, hi = support[axis]
        plate = plateaus[axis] if plateaus is not None else None
        vals = axis_bump_values(coords[axis], lo, hi, plate)
        shape = [1] * spec.dim
        shape[axis] = -1
        samples = samples * vals.reshape(shape)
    profile = "canonical" if plateaus is None else "plateau"
    return Window(Field(spec, samples), support, profile)


def window_from_samples(
    field: Field,
    support_box: Sequence[tuple[float, float]],
    profile_id: str = "custom",
) -> Window:
    """Wrap precomputed samples (partition pieces, squared cutoffs) as a Window."""
    return Window(field, tuple((float(a), float(b)) for a, b in support_box), profile_id)


# ---------------------------------------------------------------------------
# mollifiers


def _wrapped_displacement_mesh(spec: GridSpec) -> np.ndarray:
    """Displacement from 0 reduced per axis to [-L/2, L/2), shape (dim, ...)."""
    coords = coordinate_axes(spec)
    half = 0.5 * spec.period
    axes = [np.mod(c + half, spec.period) - half for c in coords]
    return np.stack(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True, eq=False)
class Mollifier:
    """Radial smooth kernel of unit discrete mass, support radius `radius`.

    `base` stores the unscaled (epsilon = 1) kernel; `epsilon` in (0, 1]
    shrinks the support to epsilon * radius.  Scaled kernels are re-evaluated
    analytically and renormalized so their discrete integral is exactly 1.
    """

    spec: GridSpec
    epsilon: float
    radius: float
    base: Window


def _radial_kernel_samples(spec: GridSpec, support_radius: float) -> np.ndarray:
    disp = _wrapped_displacement_mesh(spec)
    r = np.sqrt(np.sum(disp**2, axis=0)) / support_radius
    vals = _canonical_profile(r)
    mass = spec.cell_volume * float(np.sum(vals))
    if mass <= 0.0:
        raise ResolutionError("mollifier kernel has no mass on this grid; refine the grid")
    return vals / mass


def make_mollifier(spec: GridSpec, epsilon: float = 1.0, radius: float = 1.0) -> Mollifier:
    if not (0.0 < epsilon <= 1.0):
        raise GridError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not (0.0 < radius < 0.5 * spec.period):
        raise GridError(f"radius must lie in (0, period/2), got {radius}")
    _require_resolvable(spec, epsilon * radius)
    base_samples = _radial_kernel_samples(spec, radius)
    box = tuple((-radius, radius) for _ in range(spec.dim))
    base = Window(Field(spec, base_samples), box, "canonical")
    return Mollifier(spec, float(epsilon), float(radius), base)


def _require_resolvable(spec: GridSpec, support_radius: float) -> None:
    across = 2.0 * support_radius / spec.spacing
    if across < _MIN_KERNEL_SAMPLES:
        raise ResolutionError(
            f"mollifier support spans {across:.2f} samples, fewer than the "
            f"required {_MIN_KERNEL_SAMPLES}; increase epsilon or refine the grid"
        )


def min_resolvable_epsilon(spec: GridSpec, radius: float = 1.0) -> float:
    """Smallest epsilon whose scaled kernel still covers enough samples."""
    return 0.5 * _MIN_KERNEL_SAMPLES * spec.spacing / radius


def rescaled(moll: Mollifier, epsilon: float) -> Mollifier:
    """Same kernel family at a different epsilon."""
    if not (0.0 < epsilon <= 1.0):
        raise GridError(f"epsilon must lie in (0, 1], got {epsilon}")
    _require_resolvable(moll.spec, epsilon * moll.radius)
    return Mollifier(moll.spec, float(epsilon), moll.radius, moll.base)


def mollifier_kernel(moll: Mollifier) -> Field:
    """Scaled kernel phi_eps = eps^{-n} phi(./eps), renormalized to mass 1."""
    support = moll.epsilon * moll.radius
    _require_resolvable(moll.spec, support)
    vals = _radial_kernel_samples(moll.spec, support)
    return Field(moll.spec, vals)


def mollify(field: Field, moll: Mollifier) -> Field:
    """Periodic convolution phi_eps * u computed spectrally.

    The coefficients multiply as c_k(phi * u) = L^n c_k(phi) c_k(u), which is
    identical to the quadrature sum (L/N)^n sum_m phi(x_m) u(. - x_m).
    """
    if field.spec != moll.spec:
        raise ShapeError("field and mollifier must share a grid")
    kern = mollifier_kernel(moll)
    ck = to_spectrum(kern) * (field.spec.period**field.spec.dim)
    return from_spectrum(field.spec, to_spectrum(field) * ck)


# ---------------------------------------------------------------------------
# binary field format
#
# Layout (little endian): magic "FLD1", u32 version, u32 dim, u32 N,
# f64 period, u32 j, j * u32 block sizes, then N^dim complex samples as
# (re, im) f64 pairs in row-major order with axis 0 slowest.


def save_field(field: Field, path: str | Path) -> None:
    spec = field.spec
    header = struct.pack("<4sIII", _MAGIC, _FORMAT_VERSION, spec.dim, spec.samples_per_axis)
    header += struct.pack("<d", spec.period)
    header += struct.pack("<I", len(spec.blocks))
    header += struct.pack(f"<{len(spec.blocks)}I", *spec.blocks)
    payload = np.ascontiguousarray(field.samples, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def load_field(path: str | Path) -> Field:
    raw = Path(path).read_bytes()
    fixed = struct.calcsize("<4sIIIdI")
    if len(raw) < fixed:
        raise FieldFormatError(f"truncated header: {len(raw)} bytes, need at least {fixed}")
    magic, version, dim, n, period, j = struct.unpack_from("<4sIIIdI", raw, 0)
    if magic != _MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _FORMAT_VERSION:
        raise FieldFormatError(f"unsupported format version {version}")
    if dim < 1 or dim > _MAX_DIM:
        raise FieldFormatError(f"dimension {dim} outside supported range 1..{_MAX_DIM}")
    if n < 2 or n % 2 != 0:
        raise FieldFormatError(f"samples per axis must be even and >= 2, got {n}")
    if n**dim > _MAX_POINTS:
        raise FieldFormatError(f"dimension overflow: {n}^{dim} samples exceed the supported size")
    offset = fixed
    if len(raw) < offset + 4 * j:
        raise FieldFormatError("truncated header: block list incomplete")
    blocks = struct.unpack_from(f"<{j}I", raw, offset)
    offset += 4 * j
    expected = 16 * n**dim
    if len(raw) - offset != expected:
        raise FieldFormatError(
            f"payload holds {len(raw) - offset} bytes, expected {expected} for {n}^{dim} complex samples"
        )
    samples = np.frombuffer(raw, dtype="<c16", count=n**dim, offset=offset)
    spec = GridSpec(dim, n, period, tuple(int(b) for b in blocks))
    return Field(spec, samples.reshape(spec.shape).astype(np.complex128))
