"""Quantization, Schatten norms, modulation norms and coordinate changes.

Independent references: an explicit translate-transform-sum loop for the
modulation norm, the rank-one singular value for Schatten norms, and the
discrete L^2 identity for the Hilbert-Schmidt case.
"""

import math

import numpy as np
import pytest

from katokit.ensembles import symbol_family
from katokit.errors import HypothesisError
from katokit.grid import (
    Field,
    constant_field,
    coordinate_axes,
    field_from_values,
    from_spectrum,
    frequency_axes,
    make_bump,
    make_grid,
    plane_wave,
)
from katokit.weights import multi_order
from katokit.kato import ContinuousScheme
from katokit.psido import (
    GridIsometry,
    all_isometries,
    apply_isometry,
    apply_radial_multiplier,
    coordinate_change_check,
    dilation_ratio_check,
    hs_identity_gap,
    isometry_from_matrix,
    make_symbol,
    operator_from_matrix,
    quantize,
    schatten_bound_check,
    schatten_norm,
    self_dual_period,
    sw_embedding_check,
    sw_norm,
    symbol_l2_norm,
    tau_sweep_check,
)

TWO_PI = 2.0 * math.pi


def symbol_grid(n_samp, period=TWO_PI, blocks=(1, 1)):
    """2n-dimensional grid for symbols of a 1-D operator."""
    return make_grid(2, n_samp, period=period, blocks=blocks)


def random_symbol(spec, seed, order=None):
    rng = np.random.default_rng(seed)
    kmax = min(4, spec.samples_per_axis // 4)
    coeffs = np.zeros(spec.shape, dtype=np.complex128)
    for i in range(-kmax, kmax + 1):
        for j in range(-kmax, kmax + 1):
            coeffs[i, j] = rng.standard_normal() + 1j * rng.standard_normal()
    field = from_spectrum(spec, coeffs)
    return make_symbol(field, 1, order or multi_order((2.0, 2.0), (1, 1)))


# ---------------------------------------------------------------------------
# quantization


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0])
def test_constant_symbol_quantizes_to_identity(tau):
    spec = symbol_grid(16)
    sym = make_symbol(constant_field(spec), 1, multi_order((0.0, 0.0), (1, 1)))
    op = quantize(sym, tau)
    assert np.max(np.abs(op.entries - np.eye(16))) < 1e-10


@pytest.mark.parametrize("tau", [0.0, 0.5])
def test_x_only_symbol_is_multiplication_operator(tau):
    spec = symbol_grid(16)
    x = np.asarray(coordinate_axes(spec)[0])
    f = 2.0 + np.cos(x)
    sym_field = field_from_values(spec, np.broadcast_to(f[:, None], spec.shape))
    op = quantize(make_symbol(sym_field, 1, multi_order((0.0, 0.0), (1, 1))), tau)
    assert np.max(np.abs(op.entries - np.diag(f))) < 1e-10


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0, [[0.3]]])
def test_xi_only_symbol_acts_as_fourier_multiplier(tau):
    spec = symbol_grid(32)
    freqs = np.asarray(frequency_axes(spec)[1])
    g = (1.0 + freqs**2) ** (-1.0)
    sym_field = field_from_values(spec, np.broadcast_to(g[None, :], spec.shape))
    op = quantize(make_symbol(sym_field, 1, multi_order((0.0, 0.0), (1, 1))), tau)
    space = make_grid(1, 32)
    for k in (-5, 0, 3, 11):
        vec = plane_wave(space, k).samples
        want = (1.0 + float(k) ** 2) ** (-1.0) * vec
        assert np.max(np.abs(op.entries @ vec - want)) < 1e-9


# ---------------------------------------------------------------------------
# Schatten norms


def test_identity_operator_norm_is_one():
    spec = symbol_grid(16)
    op = quantize(make_symbol(constant_field(spec), 1, multi_order((0.0, 0.0), (1, 1))), 0.5)
    assert schatten_norm(op, math.inf) == pytest.approx(1.0, abs=1e-10)


def test_identity_trace_norm_grows_with_resolution():
    # the identity is not compact: sum of singular values equals the number
    # of grid points and diverges under refinement
    for n_samp in (8, 16):
        spec = symbol_grid(n_samp)
        op = quantize(make_symbol(constant_field(spec), 1, multi_order((0.0, 0.0), (1, 1))), 0.0)
        assert schatten_norm(op, 1.0) == pytest.approx(float(n_samp), rel=1e-10)


def test_rank_one_matrix_has_product_norm():
    # kernel phi (x) conj(psi): the only singular value is the product of
    # the discrete L^2 norms, for every exponent
    n_samp = 16
    space = make_grid(1, n_samp)
    x = np.asarray(coordinate_axes(space)[0])
    phi = np.exp(-((x - 2.0) ** 2)) + 0.3j * np.cos(x)
    psi = 1.0 / (1.0 + (x - 4.0) ** 2)
    entries = space.cell_volume * np.outer(phi, np.conj(psi))
    op = operator_from_matrix(entries, 0.0, 1, n_samp, space.period)
    want = math.sqrt(space.cell_volume * np.sum(np.abs(phi) ** 2)) * math.sqrt(
        space.cell_volume * np.sum(np.abs(psi) ** 2)
    )
    for p in (1.0, 2.0, 5.0, math.inf):
        assert schatten_norm(op, p) == pytest.approx(want, rel=1e-12)


def test_separable_delta_symbol_is_rank_one():
    # a(x, xi) = f(x) g(xi) with g concentrated on one frequency: the
    # Kohn-Nirenberg kernel f(x) e^{i xi_m (x-y)} factors, so every
    # Schatten norm collapses to the Hilbert-Schmidt value
    n_samp = 16
    spec = symbol_grid(n_samp)
    x = np.asarray(coordinate_axes(spec)[0])
    f = 1.0 + 0.5 * np.cos(x)
    g = np.zeros(n_samp)
    g[3] = 1.0
    sym_field = field_from_values(spec, f[:, None] * g[None, :])
    sym = make_symbol(sym_field, 1, multi_order((0.0, 0.0), (1, 1)))
    op = quantize(sym, 0.0)
    sv = np.linalg.svd(op.entries, compute_uv=False)
    assert sv[1] < 1e-12 * sv[0]
    hs = (TWO_PI) ** (-0.5) * symbol_l2_norm(sym)
    for p in (1.0, 2.0, math.inf):
        assert schatten_norm(op, p) == pytest.approx(hs, rel=1e-10)


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0, [[0.37]]])
def test_hilbert_schmidt_identity(tau):
    spec = symbol_grid(16)
    sym = random_symbol(spec, 5)
    assert hs_identity_gap(sym, tau) < 1e-10
    got = schatten_norm(quantize(sym, tau), 2.0)
    want = TWO_PI ** (-0.5) * symbol_l2_norm(sym)
    assert got == pytest.approx(want, rel=1e-10)


def test_hilbert_schmidt_identity_matrix_tau_2d():
    spec = make_grid(4, 8, blocks=(2, 2))
    rng = np.random.default_rng(9)
    sym_field = field_from_values(spec, rng.standard_normal(spec.shape))
    sym = make_symbol(sym_field, 2, multi_order((0.0, 0.0), (2, 2)))
    tau = np.array([[0.5, 0.3], [0.0, 0.25]])
    assert hs_identity_gap(sym, tau) < 1e-10


def test_schatten_monotone_in_p():
    spec = symbol_grid(16)
    op = quantize(random_symbol(spec, 11), 0.5)
    b1 = schatten_norm(op, 1.0)
    b2 = schatten_norm(op, 2.0)
    binf = schatten_norm(op, math.inf)
    assert b1 >= b2 * (1.0 - 1e-12)
    assert b2 >= binf * (1.0 - 1e-12)


def test_schatten_rejects_p_below_one():
    spec = symbol_grid(8)
    op = quantize(make_symbol(constant_field(spec), 1, multi_order((0.0, 0.0), (1, 1))), 0.0)
    with pytest.raises(HypothesisError):
        schatten_norm(op, 0.5)


# ---------------------------------------------------------------------------
# Schatten vs amalgam symbol norm


def test_schatten_bound_ratios_recorded():
    n_samp = 16
    period = self_dual_period(n_samp)
    spec = make_grid(2, n_samp, period=period, blocks=(1, 1))
    order = multi_order((2.0, 2.0), (1, 1))
    syms = symbol_family(
        "gaussian", spec, 1, order, seed=3, count=3,
        center_box=(1.5, 5.5), width_range=(0.5, 0.9),
    )
    window = make_bump(spec, [(1.0, 9.0)] * 2, [(3.0, 7.0)] * 2)
    report = schatten_bound_check(syms, 1.0, 0.5, window, ContinuousScheme(8))
    assert len(report.ratios) == 3
    assert all(r > 0.0 for r in report.ratios)
    assert report.max_ratio < 10.0


def test_schatten_bound_refuses_low_order():
    spec = symbol_grid(16)
    sym = random_symbol(spec, 2, multi_order((0.5, 0.5), (1, 1)))
    window = make_bump(spec, [(1.0, 5.0)] * 2)
    with pytest.raises(HypothesisError, match="s > dim"):
        schatten_bound_check([sym], 1.0, 0.5, window)


def test_tau_sweep_moves_monotonically():
    spec = symbol_grid(16)
    report = tau_sweep_check(random_symbol(spec, 21), 2.0)
    assert report.monotone_ok
    assert report.gaps_from_first[0] == 0.0


def test_self_dual_period_value():
    assert self_dual_period(32) == pytest.approx(math.sqrt(TWO_PI * 32))


# ---------------------------------------------------------------------------
# modulation norm


def sw_norm_oracle(u, p, window, m):
    """Translate -> direct DFT -> aggregate, written as plain loops."""
    spec = u.spec
    n = spec.samples_per_axis
    length = spec.period
    stride = n // m
    x = np.arange(n) * spec.spacing
    xi = np.asarray(frequency_axes(spec)[0])
    fourier = np.exp(-1j * np.outer(xi, x)) / n
    rows = np.empty((m, n))
    for j in range(m):
        windowed = u.samples * np.roll(window.field.samples, j * stride)
        rows[j] = length * np.abs(fourier @ windowed)
    if math.isinf(p):
        profile = rows.max(axis=0)
    else:
        profile = ((length / m) * np.sum(rows**p, axis=0)) ** (1.0 / p)
    return float((TWO_PI / length) * np.sum(profile))


def test_sw_norm_of_zero():
    spec = make_grid(1, 32)
    chi = make_bump(spec, [(1.0, 5.0)], [(2.0, 4.0)])
    assert sw_norm(constant_field(spec, 0.0), 2.0, chi) == 0.0


def test_sw_norm_of_constant_from_window_spectrum():
    # translating the window only rotates coefficient phases, so the
    # aggregation closes in terms of the window spectrum alone
    spec = make_grid(1, 32)
    chi = make_bump(spec, [(1.0, 5.0)], [(2.0, 4.0)])
    length = spec.period
    coeffs = np.abs(np.fft.fft(chi.field.samples) / 32)
    for p in (1.0, 2.0, math.inf):
        got = sw_norm(constant_field(spec), p, chi)
        lp_weight = length ** (1.0 / p) if not math.isinf(p) else 1.0
        want = (TWO_PI / length) * lp_weight * length * float(np.sum(coeffs))
        assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_sw_norm_matches_loop_oracle(p):
    spec = make_grid(1, 32)
    chi = make_bump(spec, [(1.0, 5.0)], [(2.0, 4.0)])
    rng = np.random.default_rng(31)
    u = field_from_values(spec, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    got = sw_norm(u, p, chi, points_per_axis=8)
    want = sw_norm_oracle(u, p, chi, 8)
    assert got == pytest.approx(want, rel=1e-10)


def test_sw_embedding_ratios_bounded():
    spec = make_grid(1, 128)
    chi = make_bump(spec, [(0.5, 2.5)], [(1.0, 2.0)])
    chi_tilde = make_bump(spec, [(0.1, 2.9)], [(0.45, 2.55)])
    order = multi_order(1.5, (1,))
    rng = np.random.default_rng(17)
    fields = []
    for _ in range(10):
        coeffs = np.zeros(128, dtype=np.complex128)
        for k in range(-10, 11):
            coeffs[k] = (rng.standard_normal() + 1j * rng.standard_normal()) / (1.0 + k * k)
        fields.append(from_spectrum(spec, coeffs))
    report = sw_embedding_check(fields, order, 2.0, chi, chi_tilde, points_per_axis=32)
    assert report.max_ratio < 10.0
    assert report.reference_product > 0.0


def test_sw_embedding_requires_integrable_weight():
    spec = make_grid(1, 128)
    chi = make_bump(spec, [(0.5, 2.5)], [(1.0, 2.0)])
    with pytest.raises(HypothesisError, match="block dimension"):
        sw_embedding_check([constant_field(spec)], multi_order(0.5, (1,)), 2.0, chi, chi)


def test_sw_embedding_requires_covering_window():
    spec = make_grid(1, 128)
    chi = make_bump(spec, [(0.5, 2.5)], [(1.0, 2.0)])
    small = make_bump(spec, [(1.2, 1.8)])
    with pytest.raises(HypothesisError, match="supp"):
        sw_embedding_check([constant_field(spec)], multi_order(1.5, (1,)), 2.0, chi, small)


def test_dilation_identity_ratio():
    spec = make_grid(1, 64)
    chi = make_bump(spec, [(1.0, 5.0)], [(2.0, 4.0)])
    rng = np.random.default_rng(41)
    fields = [field_from_values(spec, rng.standard_normal(64)) for _ in range(3)]
    report = dilation_ratio_check(fields, 2.0, chi, factor=2, points_per_axis=16)
    # lambda = id makes both sides equal; the generic prefactor (1+1)^n
    # leaves the trivial ratio 1/2
    assert report.identity_ratio == pytest.approx(0.5)
    assert all(np.isfinite(report.ratios_volume_exponent))
    assert all(np.isfinite(report.ratios_root_exponent))


# ---------------------------------------------------------------------------
# coordinate changes


def quarter_turn():
    return isometry_from_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_identity_isometry_is_trivial():
    spec = make_grid(2, 32, blocks=(2,))
    rng = np.random.default_rng(5)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    iso = GridIsometry((0, 1), (1, 1))
    report = coordinate_change_check(u, lambda t: np.sqrt(1.0 + t), iso)
    assert report.passed
    assert report.sup_err < 1e-12


def test_rotation_commutes_with_radial_multiplier():
    # b(|xi|^2) = (1 + |xi|^2)^{1/2} applied before or after a quarter turn
    spec = make_grid(2, 32, blocks=(2,))
    rng = np.random.default_rng(6)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    report = coordinate_change_check(u, lambda t: np.sqrt(1.0 + t), quarter_turn())
    assert report.passed
    assert report.sup_err < 1e-11


def test_sign_flip_with_quadratic_multiplier():
    # b(t) = t is the minus Laplacian; |xi|^2 ignores sign flips entirely
    spec = make_grid(2, 32, blocks=(2,))
    rng = np.random.default_rng(7)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    iso = GridIsometry((0, 1), (-1, 1))
    report = coordinate_change_check(u, lambda t: t, iso)
    assert report.passed
    assert report.sup_err < 1e-12


def test_all_eight_isometries_with_three_multipliers():
    spec = make_grid(2, 32, blocks=(2,))
    rng = np.random.default_rng(8)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    isos = all_isometries(2)
    assert len(isos) == 8
    for iso in isos:
        for b in (lambda t: t, lambda t: np.sqrt(1.0 + t), lambda t: np.exp(-t)):
            report = coordinate_change_check(u, b, iso)
            assert report.passed, (iso, report.sup_err)


def test_quarter_turn_has_order_four():
    iso = quarter_turn()
    spec = make_grid(2, 16, blocks=(2,))
    rng = np.random.default_rng(9)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    out = u
    for _ in range(4):
        out = apply_isometry(out, iso)
    assert np.array_equal(out.samples, u.samples)


def test_non_grid_rotation_is_refused():
    with pytest.raises(HypothesisError):
        isometry_from_matrix(np.array([[0.8, -0.6], [0.6, 0.8]]))


def test_radial_multiplier_on_plane_wave():
    spec = make_grid(2, 16, blocks=(2,))
    u = plane_wave(spec, (2, -1))
    out = apply_radial_multiplier(u, lambda t: np.exp(-t))
    want = math.exp(-5.0) * u.samples  # |xi|^2 = 4 + 1
    assert np.max(np.abs(out.samples - want)) < 1e-12
