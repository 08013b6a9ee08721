"""Amalgam norms, window independence, retraction and mollification rates.

The reference computation for the p = 2 amalgam norm is a brute-force
loop: translate the window step by step, take a Sobolev norm per
translate, combine with the quadrature weight.  Everything else builds on
that agreement.
"""

import math

import numpy as np
import pytest

from katokit.ensembles import critical_ensemble, realize_ensemble, spectral_ensemble
from katokit.errors import HypothesisError
from katokit.grid import (
    Field,
    constant_field,
    coordinate_axes,
    field_from_values,
    from_spectrum,
    make_bump,
    make_grid,
    make_mollifier,
    mollifier_kernel,
    plane_wave,
    window_from_samples,
)
from katokit.weights import multi_order, sigma_params
from katokit.sobolev import build_partition, h_norm, lattice_decomposition_ratio
from katokit.kato import (
    ContinuousScheme,
    LatticeScheme,
    amalgam_spec,
    embedding_chain_check,
    h_equals_k2_ratio,
    kato_norm,
    kato_product_check,
    mollifier_rate_check,
    retraction_roundtrip,
    window_ratio_check,
)

TWO_PI = 2.0 * math.pi


def default_window(spec):
    length = spec.period
    return make_bump(
        spec,
        [(length / 8, 7 * length / 8)] * spec.dim,
        [(length / 3, 2 * length / 3)] * spec.dim,
    )


def rng_field(spec, seed, kmax=10):
    """1-D band-limited random field with frequencies |k| <= kmax."""
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(spec.shape, dtype=np.complex128)
    for k in range(-kmax, kmax + 1):
        coeffs[k] = rng.standard_normal() + 1j * rng.standard_normal()
    return from_spectrum(spec, coeffs)


# ---------------------------------------------------------------------------
# amalgam norm values


def test_sup_amalgam_of_constant_is_window_norm():
    # translating the window does not change its Sobolev norm, so the sup
    # over translates of ||1 . tau_y chi|| equals ||chi||
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    norm_spec = amalgam_spec(order, math.inf, chi, ContinuousScheme())
    got = kato_norm(constant_field(spec), norm_spec)
    assert got == pytest.approx(h_norm(chi.field, order), rel=1e-12)


def test_l2_amalgam_of_constant_carries_period_factor():
    # constant integrand in y: the quadrature contributes L^{1/2}
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    norm_spec = amalgam_spec(order, 2.0, chi, ContinuousScheme())
    got = kato_norm(constant_field(spec), norm_spec)
    want = math.sqrt(spec.period) * h_norm(chi.field, order)
    assert got == pytest.approx(want, rel=1e-12)


def test_amalgam_norm_matches_translation_loop_oracle():
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    u = rng_field(spec, 31)
    m = 8
    norm_spec = amalgam_spec(order, 2.0, chi, ContinuousScheme(points_per_axis=m))
    got = kato_norm(u, norm_spec)
    stride = 128 // m
    acc = 0.0
    for j in range(m):
        windowed = Field(spec, u.samples * np.roll(chi.field.samples, j * stride))
        acc += h_norm(windowed, order) ** 2
    want = math.sqrt((spec.period / m) * acc)
    assert got == pytest.approx(want, rel=1e-12)


def test_amalgam_norm_oracle_2d():
    spec = make_grid(2, 64, blocks=(2,))
    order = multi_order(1.5, (2,))
    chi = default_window(spec)
    rng = np.random.default_rng(8)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    m = 4
    norm_spec = amalgam_spec(order, 2.0, chi, ContinuousScheme(points_per_axis=m))
    got = kato_norm(u, norm_spec)
    stride = 64 // m
    acc = 0.0
    for j in range(m):
        for k in range(m):
            rolled = np.roll(chi.field.samples, (j * stride, k * stride), axis=(0, 1))
            acc += h_norm(Field(spec, u.samples * rolled), order) ** 2
    want = math.sqrt((spec.period / m) ** 2 * acc)
    assert got == pytest.approx(want, rel=1e-12)


# ---------------------------------------------------------------------------
# window independence


def test_window_ratio_same_window_is_one():
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    fields = [rng_field(spec, 50 + i) for i in range(5)]
    report = window_ratio_check(fields, order, 2.0, chi, chi)
    assert report.min_ratio == pytest.approx(1.0, rel=1e-12)
    assert report.max_ratio == pytest.approx(1.0, rel=1e-12)


def test_window_ratio_translated_window_is_one():
    # the full translation grid absorbs a lattice translate of the window
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    moved = window_from_samples(
        Field(spec, np.roll(chi.field.samples, 16)), chi.support_box, "translated"
    )
    fields = [rng_field(spec, 60 + i) for i in range(5)]
    report = window_ratio_check(fields, order, 2.0, chi, moved)
    assert report.min_ratio == pytest.approx(1.0, rel=1e-12)
    assert report.max_ratio == pytest.approx(1.0, rel=1e-12)


def test_window_ratio_two_bumps_bounded_band():
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    chi = default_window(spec)
    other = make_bump(spec, [(0.1 * TWO_PI, 0.65 * TWO_PI)], [(0.25 * TWO_PI, 0.45 * TWO_PI)])
    fields = [rng_field(spec, 70 + i) for i in range(20)]
    report = window_ratio_check(fields, order, 2.0, chi, other)
    assert 0.02 < report.min_ratio
    assert report.max_ratio < 50.0


# ---------------------------------------------------------------------------
# lattice exponent and order chains


def test_single_lattice_term_makes_all_p_equal():
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    ell = spec.period / 4
    chi = make_bump(spec, [(0.1 * ell, 1.2 * ell)], [(0.3 * ell, 1.0 * ell)])
    u_win = make_bump(spec, [(0.35 * ell, 0.95 * ell)], [(0.5 * ell, 0.8 * ell)])
    u = u_win.field
    values = [
        kato_norm(u, amalgam_spec(order, p, chi, LatticeScheme(4)))
        for p in (1.0, 2.0, math.inf)
    ]
    assert values[0] == pytest.approx(values[1], rel=1e-12)
    assert values[1] == pytest.approx(values[2], rel=1e-12)


def test_p_chain_and_order_chain():
    spec = make_grid(1, 128)
    order = multi_order(1.0, (1,))
    lower = multi_order(0.5, (1,))
    chi = default_window(spec)
    for seed in range(10):
        report = embedding_chain_check(
            rng_field(spec, 80 + seed), order, lower, [1.0, 2.0, 4.0, math.inf], chi
        )
        assert report.p_chain_ok
        assert report.order_chain_ok
        norms = report.p_norms
        assert all(norms[i + 1] <= norms[i] * (1.0 + 1e-12) for i in range(len(norms) - 1))


def test_order_chain_requires_domination():
    spec = make_grid(1, 128)
    with pytest.raises(HypothesisError):
        embedding_chain_check(
            constant_field(spec),
            multi_order(0.5, (1,)),
            multi_order(1.0, (1,)),
            [2.0],
            default_window(spec),
        )


# ---------------------------------------------------------------------------
# lattice decomposition vs p=2 amalgam


def test_h_equals_k2_agrees_with_decomposition_ratio():
    spec = make_grid(1, 128)
    part = build_partition(spec, cells_per_axis=4)
    order = multi_order(1.0, (1,))
    for seed in range(5):
        u = rng_field(spec, 90 + seed)
        a = h_equals_k2_ratio(u, order, part)
        b = lattice_decomposition_ratio(u, part, order)
        assert a == pytest.approx(b, rel=1e-12)


def test_decomposition_ratio_inside_theorem_bracket():
    # Lambda^{-n/2} <= ratio <= Lambda^{n/2} C_h for 4 cells in 1-D
    from katokit.sobolev import window_multiplier_constant

    spec = make_grid(1, 128)
    part = build_partition(spec, cells_per_axis=4)
    order = multi_order(1.0, (1,))
    c_h = window_multiplier_constant(part.master.field, order)
    lower = 4.0 ** (-0.5)
    upper = 4.0**0.5 * c_h
    for seed in range(20):
        r = lattice_decomposition_ratio(rng_field(spec, 110 + seed), part, order)
        assert lower * (1.0 - 1e-9) <= r <= upper * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# product bound


def test_product_with_constant_one():
    spec = make_grid(1, 128)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    chi = default_window(spec)
    pairs = [(rng_field(spec, 120), constant_field(spec))]
    report = kato_product_check(pairs, params, 2.0, 2.0, chi)
    assert report.max_ratio <= report.reference_constant * 1.05
    assert report.max_ratio > 0.0


def test_product_plane_wave_pair():
    spec = make_grid(1, 128)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    chi = default_window(spec)
    report = kato_product_check([(plane_wave(spec, 2), plane_wave(spec, 3))], params, 2.0, 2.0, chi)
    assert report.max_ratio <= report.reference_constant * 1.05


def test_product_random_pairs_under_reference_constant():
    spec = make_grid(1, 128)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    chi = default_window(spec)
    pairs = [(rng_field(spec, 130 + i), rng_field(spec, 170 + i)) for i in range(20)]
    report = kato_product_check(pairs, params, 2.0, 2.0, chi)
    assert report.max_ratio <= report.reference_constant * 1.05


def test_product_rejects_bad_exponents():
    spec = make_grid(1, 128)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    with pytest.raises(HypothesisError):
        kato_product_check([], params, 1.0, 1.0, default_window(spec))  # r = 1/2


# ---------------------------------------------------------------------------
# retraction


def test_retraction_roundtrip_constant():
    spec = make_grid(1, 128)
    part = build_partition(spec, cells_per_axis=4)
    report = retraction_roundtrip(constant_field(spec), part, multi_order(1.0, (1,)))
    assert report.passed
    assert report.roundtrip_sup_err < 1e-10


def test_retraction_single_cell_support():
    spec = make_grid(1, 128)
    part = build_partition(spec, cells_per_axis=4)
    ell = spec.period / 4
    u = make_bump(spec, [(0.4 * ell, 0.6 * ell)], [(0.45 * ell, 0.55 * ell)]).field
    report = retraction_roundtrip(u, part, multi_order(1.0, (1,)))
    assert report.passed


def test_retraction_random_fields():
    spec = make_grid(1, 128)
    part = build_partition(spec, cells_per_axis=4)
    order = multi_order(1.0, (1,))
    for seed in range(8):
        report = retraction_roundtrip(rng_field(spec, 140 + seed), part, order)
        assert report.passed
        assert report.roundtrip_sup_err < 1e-10
        assert report.section_norm > 0.0


def test_retraction_2d():
    spec = make_grid(2, 128)
    part = build_partition(spec, cells_per_axis=4)
    rng = np.random.default_rng(3)
    u = field_from_values(spec, rng.standard_normal(spec.shape))
    report = retraction_roundtrip(u, part, multi_order(1.0, (2,)))
    assert report.passed


# ---------------------------------------------------------------------------
# mollifier approximation rate


def test_rate_equal_orders_bound_is_twice_the_norm():
    spec = make_grid(1, 256)
    order = multi_order(1.0, (1,))
    u = rng_field(spec, 150)
    moll = make_mollifier(spec)
    report = mollifier_rate_check(u, order, order, moll, [0.4, 0.2, 0.1])
    assert report.bound_ok
    base = h_norm(u, order)
    for b in report.bounds:
        assert b == pytest.approx(2.0 * base, rel=1e-12)


def test_rate_single_mode_closed_form():
    # for u = e^{i3x} the error norm is |phihat_eps(3) - 1| <3>^{s'} sqrt(2 pi)
    spec = make_grid(1, 256)
    s, sp = multi_order(1.0, (1,)), multi_order(0.5, (1,))
    u = plane_wave(spec, 3)
    moll = make_mollifier(spec)
    epsilons = [0.4, 0.2, 0.1]
    report = mollifier_rate_check(u, s, sp, moll, epsilons)
    assert report.bound_ok
    x = np.asarray(coordinate_axes(spec)[0])
    from katokit.grid import rescaled

    for eps, err, bound in zip(epsilons, report.errors, report.bounds):
        kernel = mollifier_kernel(rescaled(moll, eps)).samples
        phat = spec.cell_volume * np.sum(kernel * np.exp(-1j * 3 * x))
        want = abs(phat - 1.0) * 10.0**0.25 * math.sqrt(TWO_PI)
        assert err == pytest.approx(want, rel=1e-10)
        want_bound = 2.0**0.5 * eps**0.5 * 10.0**0.5 * math.sqrt(TWO_PI)
        assert bound == pytest.approx(want_bound, rel=1e-12)


def test_rate_slope_matches_order_gap():
    # an ensemble with just-critical spectral decay realizes the declared
    # rate; faster-decaying fields would sit below it
    spec = make_grid(1, 1024)
    moll = make_mollifier(spec)
    fields = realize_ensemble(critical_ensemble(5, 4, 1, 500, 2.0, delta=0.02), spec)
    slopes = []
    for u in fields:
        report = mollifier_rate_check(
            u,
            multi_order(2.0, (1,)),
            multi_order(1.0, (1,)),
            moll,
            [0.4, 0.2, 0.1, 0.05],
            window=default_window(spec),
        )
        assert report.bound_ok
        assert report.young_ok
        slopes.append(report.slope)
    assert 0.9 <= float(np.median(slopes)) <= 1.1


def test_rate_requires_order_domination():
    spec = make_grid(1, 256)
    moll = make_mollifier(spec)
    with pytest.raises(HypothesisError):
        mollifier_rate_check(
            constant_field(spec),
            multi_order(0.5, (1,)),
            multi_order(1.0, (1,)),
            moll,
            [0.2],
        )
