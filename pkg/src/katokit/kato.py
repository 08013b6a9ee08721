"""Windowed (Wiener amalgam) Sobolev norms and their structure checks.

The uniformly-local / amalgam norm of a field u with window chi is

    ||u||_{s,p,chi} = ( integral_y ||u . tau_y chi||_{H^s}^p dy )^{1/p},

with the translation integral either discretized on a sub-lattice of the
sample grid (continuous scheme, trapezoid = plain sum on the torus) or
replaced by the counting sum over lattice translations (lattice scheme).
At p = infinity the norm is the max over the translation grid, a lower
bound for the true sup, which is how it is reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisError, ShapeError
from .grid import (
    Field,
    GridSpec,
    Mollifier,
    Window,
    make_bump,
    mollifier_kernel,
    mollify,
    rescaled,
    sup_norm,
    to_spectrum,
    window_from_samples,
)
from .sobolev import PartitionOfUnity, h_norm, weight_mesh
from .weights import MultiOrder, SigmaParams

__all__ = [
    "ContinuousScheme",
    "LatticeScheme",
    "AmalgamNormSpec",
    "amalgam_spec",
    "translation_shifts",
    "windowed_norms",
    "windowed_spectra",
    "kato_norm",
    "window_ratio_check",
    "WindowRatioReport",
    "embedding_chain_check",
    "EmbeddingChainReport",
    "h_equals_k2_ratio",
    "kato_product_check",
    "KatoProductReport",
    "make_retraction_window",
    "retraction_roundtrip",
    "RetractionReport",
    "mollifier_rate_check",
    "MollifierRateReport",
]


@dataclass(frozen=True)
class ContinuousScheme:
    """Translation integral over the y-grid with M points per axis (None = N)."""

    points_per_axis: int | None = None


@dataclass(frozen=True)
class LatticeScheme:
    """Counting sum over Gamma = (L / cells_per_axis) Z^n on the torus."""

    cells_per_axis: int = 4


@dataclass(frozen=True, eq=False)
class AmalgamNormSpec:
    """Order, integrability p, window and translation scheme for one norm."""

    order: MultiOrder
    p: float
    window: Window
    scheme: ContinuousScheme | LatticeScheme

    def __post_init__(self) -> None:
        if not (self.p >= 1.0):
            raise HypothesisError(f"p must satisfy p >= 1, got {self.p}")
        if self.order.blocks != self.window.spec.blocks:
            raise ShapeError("order blocks must match the window's grid blocks")


def amalgam_spec(
    order: MultiOrder,
    p: float,
    window: Window,
    scheme: ContinuousScheme | LatticeScheme | None = None,
) -> AmalgamNormSpec:
    """Validated constructor; lattice schemes must have strictly positive
    window coverage Psi = sum_gamma |tau_gamma chi|^2 on every sample."""
    scheme = scheme or ContinuousScheme()
    spec = AmalgamNormSpec(order, float(p), window, scheme)
    if isinstance(scheme, LatticeScheme):
        psi = lattice_coverage(window, scheme.cells_per_axis)
        if float(np.min(psi)) <= 0.0:
            raise HypothesisError(
                "window coverage sum_gamma |tau_gamma chi|^2 vanishes somewhere on the torus"
            )
    return spec


def lattice_coverage(window: Window, cells_per_axis: int) -> np.ndarray:
    spec = window.spec
    lam = int(cells_per_axis)
    if spec.samples_per_axis % lam != 0:
        raise ShapeError(f"cells_per_axis {lam} must divide samples_per_axis {spec.samples_per_axis}")
    stride = spec.samples_per_axis // lam
    psi = np.zeros(spec.shape, dtype=float)
    for gamma in itertools.product(range(lam), repeat=spec.dim):
        rolled = np.roll(window.field.samples, tuple(g * stride for g in gamma), axis=tuple(range(spec.dim)))
        psi += np.abs(rolled) ** 2
    return psi


def translation_shifts(
    spec: GridSpec, scheme: ContinuousScheme | LatticeScheme
) -> tuple[np.ndarray, float]:
    """Index shift vectors (G, dim) and the p-sum quadrature weight."""
    n_samp = spec.samples_per_axis
    if isinstance(scheme, ContinuousScheme):
        m = scheme.points_per_axis or n_samp
        if n_samp % m != 0:
            raise ShapeError(f"translation grid {m} must divide samples_per_axis {n_samp}")
        stride = n_samp // m
        weight = (spec.period / m) ** spec.dim
    elif isinstance(scheme, LatticeScheme):
        m = scheme.cells_per_axis
        if n_samp % m != 0:
            raise ShapeError(f"cells_per_axis {m} must divide samples_per_axis {n_samp}")
        stride = n_samp // m
        weight = 1.0
    else:
        raise ShapeError(f"unknown scheme {scheme!r}")
    grids = np.meshgrid(*([np.arange(m) * stride] * spec.dim), indexing="ij")
    shifts = np.stack([g.ravel() for g in grids], axis=-1)
    return shifts, weight


_BATCH_ELEMENTS = 1 << 22


def _rolled_window_stack(window_samples: np.ndarray, shifts: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Stack of tau_{y} chi over index shifts, shape (G, N, .., N)."""
    n_samp = spec.samples_per_axis
    base = np.arange(n_samp)
    index: list[np.ndarray] = []
    g = shifts.shape[0]
    for axis in range(spec.dim):
        idx = (base[None, :] - shifts[:, axis : axis + 1]) % n_samp  # (G, N)
        shape = [g] + [1] * spec.dim
        shape[1 + axis] = n_samp
        index.append(idx.reshape(shape))
    return window_samples[tuple(index)]


def windowed_spectra(field: Field, window: Window, shifts: np.ndarray) -> np.ndarray:
    """Coefficients c_k(u . tau_y chi) for each shift, shape (G, N, .., N)."""
    if field.spec != window.spec:
        raise ShapeError("field and window must share a grid")
    spec = field.spec
    out = np.empty((shifts.shape[0],) + spec.shape, dtype=np.complex128)
    batch = max(1, _BATCH_ELEMENTS // max(spec.num_points, 1))
    axes = tuple(range(1, spec.dim + 1))
    for start in range(0, shifts.shape[0], batch):
        part = shifts[start : start + batch]
        stack = _rolled_window_stack(window.field.samples, part, spec)
        stack = stack * field.samples[None, ...]
        out[start : start + part.shape[0]] = np.fft.fftn(stack, axes=axes) / spec.num_points
    return out


def windowed_norms(field: Field, window: Window, shifts: np.ndarray, order: MultiOrder) -> np.ndarray:
    """||u . tau_y chi||_{H^s} over the shift set."""
    spec = field.spec
    w = weight_mesh(spec, order)
    coeffs = windowed_spectra(field, window, shifts)
    vol = spec.period**spec.dim
    sq = np.sum((w[None, ...] * np.abs(coeffs)) ** 2, axis=tuple(range(1, spec.dim + 1)))
    return np.sqrt(vol * sq)


def kato_norm(field: Field, norm_spec: AmalgamNormSpec) -> float:
    """Evaluate the amalgam norm under the given scheme.

    p = infinity returns the max over the translation grid (a certified
    lower bound for the continuum sup).
    """
    if field.spec != norm_spec.window.spec:
        raise ShapeError("field and norm window must share a grid")
    shifts, weight = translation_shifts(field.spec, norm_spec.scheme)
    vals = windowed_norms(field, norm_spec.window, shifts, norm_spec.order)
    if math.isinf(norm_spec.p):
        return float(np.max(vals))
    p = norm_spec.p
    return float((weight * np.sum(vals**p)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# structure checks


@dataclass(frozen=True)
class WindowRatioReport:
    ratios: tuple[float, ...]
    min_ratio: float
    max_ratio: float


def window_ratio_check(
    fields: Sequence[Field],
    order: MultiOrder,
    p: float,
    window: Window,
    other: Window,
    scheme: ContinuousScheme | LatticeScheme | None = None,
) -> WindowRatioReport:
    """Norm ratios under two admissible windows over a field ensemble.

    Window independence of the space means these ratios stay in a fixed
    bracket; the report records the empirical spread.
    """
    spec_a = amalgam_spec(order, p, window, scheme)
    spec_b = amalgam_spec(order, p, other, scheme)
    ratios = []
    for f in fields:
        a = kato_norm(f, spec_a)
        b = kato_norm(f, spec_b)
        ratios.append(a / max(b, 1e-300))
    return WindowRatioReport(tuple(ratios), min(ratios), max(ratios))


@dataclass(frozen=True)
class EmbeddingChainReport:
    p_chain_ok: bool
    order_chain_ok: bool
    p_values: tuple[float, ...]
    p_norms: tuple[float, ...]
    order_norms: tuple[float, float]


def embedding_chain_check(
    field: Field,
    order: MultiOrder,
    lower: MultiOrder,
    p_values: Sequence[float],
    window: Window,
    cells_per_axis: int = 4,
    tol: float = 1e-12,
) -> EmbeddingChainReport:
    """Exact monotonicity: lattice norms decrease in p and increase in order.

    Both follow termwise: ell^p >= ell^q on identical summands for p <= q,
    and <<xi>>^{s'} <= <<xi>>^{s} pointwise when s' <= s componentwise.
    """
    if not order.dominates(lower):
        raise HypothesisError("order chain requires lower <= order componentwise")
    ps = sorted(float(p) for p in p_values)
    scheme = LatticeScheme(cells_per_axis)
    norms = tuple(kato_norm(field, amalgam_spec(order, p, window, scheme)) for p in ps)
    p_ok = all(norms[i + 1] <= norms[i] * (1.0 + tol) for i in range(len(norms) - 1))
    hi = kato_norm(field, amalgam_spec(order, 2.0, window, scheme))
    lo = kato_norm(field, amalgam_spec(lower, 2.0, window, scheme))
    order_ok = lo <= hi * (1.0 + tol)
    return EmbeddingChainReport(p_ok, order_ok, tuple(ps), norms, (lo, hi))


def h_equals_k2_ratio(field: Field, order: MultiOrder, partition: PartitionOfUnity) -> float:
    """||u||_{s,2,Gamma,h} / ||u||_{H^s} with the partition master window."""
    scheme = LatticeScheme(partition.cells_per_axis)
    norm_spec = amalgam_spec(order, 2.0, partition.master, scheme)
    return kato_norm(field, norm_spec) / max(h_norm(field, order), 1e-300)


@dataclass(frozen=True)
class KatoProductReport:
    ratios: tuple[float, ...]
    max_ratio: float
    reference_constant: float


def kato_product_check(
    pairs: Sequence[tuple[Field, Field]],
    params: SigmaParams,
    p: float,
    q: float,
    window: Window,
    scheme: ContinuousScheme | LatticeScheme | None = None,
) -> KatoProductReport:
    """Amalgam Hoelder bound ||u v||_{sigma,r,chi^2} <= C ||u||_{s,p,chi} ||v||_{t,q,chi}.

    1/r = 1/p + 1/q; the squared window pairs with the product because
    (u tau_y chi)(v tau_y chi) = u v tau_y chi^2 pointwise, and the y-sum
    obeys Hoelder with matching quadrature weights.
    """
    if math.isinf(p) and math.isinf(q):
        r = math.inf
    elif math.isinf(p):
        r = q
    elif math.isinf(q):
        r = p
    else:
        r = 1.0 / (1.0 / p + 1.0 / q)
    if r < 1.0:
        raise HypothesisError(f"exponents p={p}, q={q} give r={r} < 1")
    chi_sq = window_from_samples(
        Field(window.spec, window.field.samples**2), window.support_box, "squared"
    )
    spec_u = amalgam_spec(params.s, p, window, scheme)
    spec_v = amalgam_spec(params.t, q, window, scheme)
    spec_uv = amalgam_spec(params.sigma, r, chi_sq, scheme)
    from .weights import weight_conv_constant_total

    scale = (window.spec.period / (2.0 * math.pi)) ** window.spec.dim
    reference = math.sqrt(scale * weight_conv_constant_total(params))
    ratios = []
    for u, v in pairs:
        uv = Field(u.spec, u.samples * v.samples)
        num = kato_norm(uv, spec_uv)
        den = kato_norm(u, spec_u) * kato_norm(v, spec_v)
        ratios.append(num / max(den, 1e-300))
    return KatoProductReport(tuple(ratios), max(ratios), reference)


# ---------------------------------------------------------------------------
# retraction / coretraction onto lattice pieces


def make_retraction_window(partition: PartitionOfUnity, margin: float = 0.1) -> Window:
    """Plateau window equal to 1 on a neighborhood of the master bump support.

    The master support spans cell coordinates [-1/12, 13/12]; the plateau
    extends `margin` cells beyond it and the support another half cell,
    which stays shorter than one period for 2 or more cells per axis.
    """
    ell = partition.cell_side
    plo = (-1.0 / 12.0 - margin) * ell
    phi = (13.0 / 12.0 + margin) * ell
    lo = plo - 0.5 * ell
    hi = phi + 0.5 * ell
    if hi - lo >= partition.spec.period:
        raise ShapeError("retraction window does not fit on the torus; reduce the margin")
    spec = partition.spec
    coords = [np.asarray(c) for c in _cell_coords(spec)]
    samples = np.ones(spec.shape, dtype=float)
    for axis in range(spec.dim):
        x = coords[axis]
        center = 0.5 * (lo + hi)
        disp = np.mod(x - center + 0.5 * spec.period, spec.period) - 0.5 * spec.period
        vals = _plateau_profile(disp + center, lo, hi, plo, phi)
        shape = [1] * spec.dim
        shape[axis] = -1
        samples = samples * vals.reshape(shape)
    return window_from_samples(Field(spec, samples), tuple((lo, hi) for _ in range(spec.dim)), "plateau")


def _cell_coords(spec: GridSpec) -> list[np.ndarray]:
    from .grid import coordinate_axes

    return [np.asarray(c) for c in coordinate_axes(spec)]


def _plateau_profile(x: np.ndarray, lo: float, hi: float, plo: float, phi: float) -> np.ndarray:
    from .grid import smooth_step

    rise = smooth_step((x - lo) / (plo - lo))
    fall = smooth_step((hi - x) / (hi - phi))
    return np.where((x > lo) & (x < hi), rise * fall, 0.0)


@dataclass(frozen=True)
class RetractionReport:
    roundtrip_sup_err: float
    section_norm: float
    assembled_norm: float
    reference_norm: float
    passed: bool


def retraction_roundtrip(
    field: Field,
    partition: PartitionOfUnity,
    order: MultiOrder,
    p: float = 2.0,
    wide: Window | None = None,
    tol: float = 1e-10,
) -> RetractionReport:
    """Slice u into lattice pieces and reassemble: R_chi(S u) = u exactly.

    S u = ((tau_k h) u)_k over lattice points k, R_chi((u_k)) =
    sum_k (tau_k chi) u_k with chi = 1 near supp h, so chi h = h and the
    composition telescopes through sum_k tau_k h = 1.
    """
    if field.spec != partition.spec:
        raise ShapeError("field and partition must share a grid")
    chi = wide or make_retraction_window(partition)
    spec = field.spec
    axes = tuple(range(spec.dim))
    master = partition.master.field.samples
    chi_samples = chi.field.samples
    pieces: list[np.ndarray] = []
    assembled = np.zeros(spec.shape, dtype=np.complex128)
    norms_p: list[float] = []
    for shifts in partition.lattice_points():
        piece = np.roll(master, shifts, axis=axes) * field.samples
        pieces.append(piece)
        assembled += np.roll(chi_samples, shifts, axis=axes) * piece
        norms_p.append(h_norm(Field(spec, piece), order))
    err = float(np.max(np.abs(assembled - field.samples)))
    arr = np.asarray(norms_p)
    section = float(np.max(arr)) if math.isinf(p) else float(np.sum(arr**p) ** (1.0 / p))
    assembled_norm = h_norm(Field(spec, assembled), order)
    reference = h_norm(field, order)
    scale = max(float(np.max(np.abs(field.samples))), 1e-300)
    return RetractionReport(
        roundtrip_sup_err=err,
        section_norm=section,
        assembled_norm=assembled_norm,
        reference_norm=reference,
        passed=err <= tol * scale,
    )


# ---------------------------------------------------------------------------
# mollifier approximation rate


@dataclass(frozen=True)
class MollifierRateReport:
    epsilons: tuple[float, ...]
    errors: tuple[float, ...]
    bounds: tuple[float, ...]
    bound_ok: bool
    young_ok: bool
    slope: float
    slope_target: float


def mollifier_rate_check(
    field: Field,
    order_s: MultiOrder,
    order_sp: MultiOrder,
    moll: Mollifier,
    epsilons: Sequence[float],
    window: Window | None = None,
    bound_tol: float = 1e-10,
    young_tol: float = 1e-10,
) -> MollifierRateReport:
    """Approximation rate and stability of mollification.

    Checks, at every epsilon: the two-sided bound
    ||phi_eps * u - u||_{H^{s'}} <= 2^{1-theta} eps^theta ||u||_{H^s} with
    theta = min(s - s', 1) taken blockwise-minimal, and the Young bound
    ||phi_eps * u||_{s,sup,chi} <= ||u||_{s,sup,chi} (unit-mass positive
    kernel).  Fits the log-log slope of the error against epsilon.
    """
    if not order_s.dominates(order_sp):
        raise HypothesisError("rate check needs s' <= s componentwise")
    theta = min(min(a - b for a, b in zip(order_s.s, order_sp.s)), 1.0)
    if theta < 0.0:
        raise HypothesisError("rate exponent theta must be nonnegative")
    base = h_norm(field, order_s)
    errors: list[float] = []
    bounds: list[float] = []
    young_ok = True
    sup_spec = None
    if window is not None:
        sup_spec = amalgam_spec(order_s, math.inf, window, ContinuousScheme())
        u_ul = kato_norm(field, sup_spec)
    for eps in epsilons:
        m = rescaled(moll, float(eps))
        smoothed = mollify(field, m)
        diff = Field(field.spec, smoothed.samples - field.samples)
        err = h_norm(diff, order_sp)
        bound = 2.0 ** (1.0 - theta) * float(eps) ** theta * base
        errors.append(err)
        bounds.append(bound)
        if sup_spec is not None:
            kernel_mass = field.spec.cell_volume * float(np.sum(mollifier_kernel(m).samples.real))
            lhs = kato_norm(smoothed, sup_spec)
            if lhs > kernel_mass * u_ul * (1.0 + young_tol):
                young_ok = False
    bound_ok = all(e <= b * (1.0 + bound_tol) for e, b in zip(errors, bounds))
    logs_e = np.log(np.asarray(errors))
    logs_x = np.log(np.asarray([float(e) for e in epsilons]))
    slope = float(np.polyfit(logs_x, logs_e, 1)[0])
    return MollifierRateReport(
        epsilons=tuple(float(e) for e in epsilons),
        errors=tuple(errors),
        bounds=tuple(bounds),
        bound_ok=bound_ok,
        young_ok=young_ok,
        slope=slope,
        slope_target=theta,
    )
