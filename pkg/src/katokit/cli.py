"""Command line front end.

Three subcommands:

``katokit compute``
    Evaluate a single norm (l2, sup, h-norm, kato-norm, sw-norm, schatten)
    on a stored field and print the value.

``katokit verify``
    Run one claim suite (or ``all``) and write one JSON report plus a
    flattened ``<suite>-cases.csv`` per suite into the output directory.
    Every case carries a three-valued verdict: PASS, INCONCLUSIVE, or FAIL.
    FAIL is reserved for violations of mathematically asserted statements;
    empirical comparisons that merely drift out of their expected bracket
    are INCONCLUSIVE.

``katokit report``
    Render a stored report (or a directory of reports) as a table, with an
    optional CSV export of all cases.

Exit codes: 0 when every case is PASS or INCONCLUSIVE, 1 when any case
FAILs, 2 for usage errors, malformed configuration, or configurations that
violate a hypothesis of the requested check.

Reports are byte-reproducible for a fixed seed and configuration except
for the ``environment`` key.  Set ``KATOKIT_THREADS`` to run independent
suites of ``verify all`` concurrently; results and bytes do not depend on
the thread count.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .errors import ContourConfigError, HypothesisError, KatokitError
from .grid import (
    Field,
    GridSpec,
    coordinate_axes,
    field_from_values,
    frequency_axes,
    l2_norm,
    load_field,
    make_bump,
    make_grid,
    make_mollifier,
    plane_wave,
    sup_norm,
)
from .weights import multi_order, peetre_check, sigma_params, weight_conv_check
from .sobolev import (
    bessel_apply,
    build_partition,
    derivative_split_check,
    h_norm,
    lattice_decomposition_ratio,
    product_bound_check,
    rl_sup_bound_check,
    spectral_derivative,
    twisted_periodization,
    window_multiplier_constant,
)
from .kato import (
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
from .calculus import (
    ContourSpec,
    calderon_apply,
    chain_rule_check,
    check_partial_consistency,
    composite_continuity_check,
    divide,
    holo_exp,
    holo_identity,
    holo_product2,
    holo_square,
    invert,
    joint_spectrum_witness,
)
from .psido import (
    all_isometries,
    coordinate_change_check,
    hs_identity_gap,
    isometry_from_matrix,
    make_symbol,
    quantize,
    schatten_bound_check,
    schatten_norm,
    self_dual_period,
    sw_embedding_check,
    sw_norm,
    dilation_ratio_check,
    tau_sweep_check,
)
from .ensembles import (
    critical_ensemble,
    positive_field,
    realize_ensemble,
    spectral_ensemble,
    symbol_family,
)

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

_SEVERITY = {PASS: 0, INCONCLUSIVE: 1, FAIL: 2}


def _aggregate(verdicts: Sequence[str]) -> str:
    worst = PASS
    for v in verdicts:
        if _SEVERITY[v] > _SEVERITY[worst]:
            worst = v
    return worst


def _suite_seed(base: int, suite_id: str) -> int:
    """Per-suite seed: stable under reordering and suite subset selection."""
    seq = np.random.SeedSequence([int(base), zlib.crc32(suite_id.encode("ascii"))])
    return int(seq.generate_state(1)[0])


def _child(seed: int, index: int) -> int:
    seq = np.random.SeedSequence([int(seed), int(index)])
    return int(seq.generate_state(1)[0])


def _stable(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def _default_window(spec: GridSpec):
    length = spec.period
    return make_bump(
        spec,
        [(length / 8.0, 7.0 * length / 8.0)] * spec.dim,
        [(length / 3.0, 2.0 * length / 3.0)] * spec.dim,
    )


def _narrow_window(spec: GridSpec):
    length = spec.period
    return make_bump(
        spec,
        [(length / 16.0, 9.0 * length / 16.0)] * spec.dim,
        [(length / 4.0, 3.0 * length / 8.0)] * spec.dim,
    )


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


# ---------------------------------------------------------------------------
# suites


def _suite_peetre(cfg: dict, seed: int):
    rep = peetre_check(
        samples=int(cfg["samples"]),
        seed=seed,
        max_dim=int(cfg["max_dim"]),
        order_bound=float(cfg["order_bound"]),
        scale=float(cfg["scale"]),
    )
    cases = [
        {
            "label": f"randomized two-sided quotient, {rep.samples} draws",
            "max_ratio": rep.max_ratio,
            "verdict": _verdict(rep.passed),
        }
    ]
    return cases, {}


def _suite_weight_conv(cfg: dict, seed: int):
    combos = [
        ((1.0,), (1.0,), (0.25,), (1,)),
        ((-0.5,), (2.0,), (0.25,), (1,)),
        ((0.8, 1.2), (0.9, 0.7), (0.2, 0.2), (1, 1)),
        ((1.5,), (1.5,), (0.25,), (2,)),
    ]
    cases = []
    for s, t, eps, blocks in combos:
        params = sigma_params(s, t, eps, blocks)
        rep = weight_conv_check(
            params,
            box=float(cfg["box"]),
            step=float(cfg["step"]),
            probes_per_block=int(cfg["probes_per_block"]),
        )
        cases.append(
            {
                "label": f"s={list(s)} t={list(t)} eps={list(eps)} blocks={list(blocks)}",
                "max_ratio": rep.max_ratio,
                "tail_fraction": rep.tail_fraction,
                "verdict": rep.verdict,
            }
        )
    return cases, {}


def _suite_spectral_exactness(cfg: dict, seed: int):
    tol = float(cfg["tol"])
    cases = []

    spec = make_grid(1, int(cfg["samples_per_axis"]))
    order = multi_order(1.3, (1,))
    scale = 2.0 * math.pi / spec.period
    modes = [0, 1, -3, 7, spec.samples_per_axis // 2 - 1]
    worst_w = 0.0
    worst_d = 0.0
    for k in modes:
        pw = plane_wave(spec, [k])
        xi = scale * k
        expect = (1.0 + xi * xi) ** (order.s[0] / 2.0)
        got = bessel_apply(pw, order)
        worst_w = max(worst_w, float(np.max(np.abs(got.samples - expect * pw.samples))))
        dgot = spectral_derivative(pw, 0)
        worst_d = max(worst_d, float(np.max(np.abs(dgot.samples - 1j * xi * pw.samples))))
    cases.append(
        {
            "label": "weight multiplier on plane waves, one axis",
            "max_err": worst_w,
            "verdict": _verdict(worst_w <= tol),
        }
    )
    cases.append(
        {
            "label": "spectral derivative on plane waves, one axis",
            "max_err": worst_d,
            "verdict": _verdict(worst_d <= tol),
        }
    )

    spec2 = make_grid(2, 32, blocks=(1, 1))
    order2 = multi_order((0.7, -1.1), (1, 1))
    scale2 = 2.0 * math.pi / spec2.period
    worst2 = 0.0
    for k in [(0, 0), (3, -5), (10, 2)]:
        pw = plane_wave(spec2, k)
        expect = 1.0
        for axis, ka in enumerate(k):
            xi = scale2 * ka
            expect *= (1.0 + xi * xi) ** (order2.s[axis] / 2.0)
        got = bessel_apply(pw, order2)
        worst2 = max(worst2, float(np.max(np.abs(got.samples - expect * pw.samples))))
    cases.append(
        {
            "label": "split-order weight multiplier on plane waves, two blocks",
            "max_err": worst2,
            "verdict": _verdict(worst2 <= tol),
        }
    )

    n_op = 32
    period = self_dual_period(n_op)
    space = make_grid(1, n_op, period=period)
    sym_spec = make_grid(2, n_op, period=period, blocks=(1, 1))
    freqs = np.asarray(frequency_axes(sym_spec)[0])
    g = (1.0 + freqs**2) ** -1.0
    sym_field = field_from_values(sym_spec, np.broadcast_to(g[None, :], sym_spec.shape))
    sym = make_symbol(sym_field, 1, multi_order((0.0, 0.0), (1, 1)))
    scale_op = 2.0 * math.pi / period
    worst_q = 0.0
    for tau in (0.0, 0.5, 1.0):
        op = quantize(sym, tau)
        for k in (0, 2, -5):
            pw = plane_wave(space, [k])
            vec = pw.samples.ravel()
            out = op.entries @ vec
            xi = scale_op * k
            eig = (1.0 + xi * xi) ** -1.0
            worst_q = max(worst_q, float(np.max(np.abs(out - eig * vec))))
    cases.append(
        {
            "label": "quantized frequency multiplier on plane waves, all tau",
            "max_err": worst_q,
            "verdict": _verdict(worst_q <= tol),
        }
    )
    return cases, {}


def _suite_exact_identities(cfg: dict, seed: int):
    tol = float(cfg["tol"])
    hs_tol = float(cfg["hs_tol"])
    count = int(cfg["count"])
    cases = []

    spec = make_grid(1, int(cfg["samples_per_axis"]))
    fields = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 1, kmax=20), spec)
    order = multi_order(1.5, (1,))
    worst = 0.0
    ok = True
    for u in fields:
        rep = derivative_split_check(u, order, 0, tol=tol)
        worst = max(worst, rep.rel_err)
        ok = ok and rep.passed
    cases.append(
        {
            "label": "derivative norm split, single block",
            "max_rel_err": worst,
            "verdict": _verdict(ok),
        }
    )

    spec2 = make_grid(2, 32, blocks=(1, 1))
    fields2 = realize_ensemble(spectral_ensemble(_child(seed, 1), max(2, count // 2), 2, kmax=8), spec2)
    order2 = multi_order((1.0, 2.0), (1, 1))
    worst2 = 0.0
    ok2 = True
    for u in fields2:
        for block in range(2):
            rep = derivative_split_check(u, order2, block, tol=tol)
            worst2 = max(worst2, rep.rel_err)
            ok2 = ok2 and rep.passed
    cases.append(
        {
            "label": "derivative norm split, both blocks of a split grid",
            "max_rel_err": worst2,
            "verdict": _verdict(ok2),
        }
    )

    part = build_partition(spec, 4)
    rep = retraction_roundtrip(fields[0], part, order, tol=tol)
    cases.append(
        {
            "label": "partition retraction round trip",
            "roundtrip_sup_err": rep.roundtrip_sup_err,
            "verdict": _verdict(rep.passed),
        }
    )

    n_op = 16
    period = self_dual_period(n_op)
    sym_spec = make_grid(2, n_op, period=period, blocks=(1, 1))
    syms = symbol_family("random", sym_spec, 1, multi_order((0.0, 0.0), (1, 1)), _child(seed, 2), 3)
    worst_hs = 0.0
    for sym in syms:
        for tau in (0.0, 0.5, 1.0):
            worst_hs = max(worst_hs, hs_identity_gap(sym, tau))
    cases.append(
        {
            "label": "Hilbert-Schmidt norm equals scaled symbol l2 norm, scalar tau",
            "max_gap": worst_hs,
            "verdict": _verdict(worst_hs <= hs_tol),
        }
    )

    n_op2 = 12
    period2 = self_dual_period(n_op2)
    sym_spec2 = make_grid(4, n_op2, period=period2, blocks=(2, 2))
    syms2 = symbol_family("random", sym_spec2, 2, multi_order((0.0, 0.0), (2, 2)), _child(seed, 3), 2)
    tau_mat = np.array([[0.5, 0.3], [0.0, 0.25]])
    worst_hs2 = 0.0
    for sym in syms2:
        worst_hs2 = max(worst_hs2, hs_identity_gap(sym, tau_mat))
    cases.append(
        {
            "label": "Hilbert-Schmidt norm equals scaled symbol l2 norm, matrix tau",
            "max_gap": worst_hs2,
            "verdict": _verdict(worst_hs2 <= hs_tol),
        }
    )
    return cases, {}


def _suite_window_bound(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    count = int(cfg["count"])
    fields = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 1, kmax=20), spec)
    order = multi_order(1.2, (1,))
    chi = _default_window(spec).field
    x = coordinate_axes(spec)[0]
    smooth = field_from_values(spec, (2.0 + np.cos(x)) * np.exp(1j * np.sin(x)))
    cases = []
    for mode, factor in (("window", chi), ("periodic", smooth), ("bounded_smooth", smooth)):
        worst = 0.0
        ok = True
        const = 0.0
        for u in fields:
            rep = product_bound_check(u, factor, order, mode=mode)
            worst = max(worst, rep.ratio)
            const = rep.constant
            ok = ok and rep.passed
        cases.append(
            {
                "label": f"{mode} multiplier bound over {count} fields",
                "max_ratio": worst,
                "constant": const,
                "verdict": _verdict(ok),
            }
        )
    return cases, {}


def _suite_sobolev_product(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    count = int(cfg["count"])
    us = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 1, kmax=20), spec)
    vs = realize_ensemble(spectral_ensemble(_child(seed, 1), count, 1, kmax=20), spec)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    worst = 0.0
    const = 0.0
    ok = True
    for u, v in zip(us, vs):
        rep = product_bound_check(u, v, params.s, mode="sobolev_pair", params=params)
        worst = max(worst, rep.ratio)
        const = rep.constant
        ok = ok and rep.passed
    cases = [
        {
            "label": f"pairwise product bound over {count} pairs, s=t=1",
            "max_ratio": worst,
            "constant": const,
            "verdict": _verdict(ok),
        }
    ]
    return cases, {}


def _suite_twisted_periodization(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    cells = int(cfg["cells_per_axis"])
    cell = spec.period / cells
    window = make_bump(spec, [(0.15 * cell, 0.9 * cell)], [(0.4 * cell, 0.6 * cell)])
    scale = 2.0 * math.pi / spec.period
    cases = []
    for label, theta in (
        ("zero twist", 0.0),
        ("grid-representable twist", 4.0 * scale),
        ("irrational twist, rounded to the grid", 1.0),
    ):
        rep = twisted_periodization(window, [theta], cells_per_axis=cells)
        cases.append(
            {
                "label": label,
                "theta_offset": rep.theta_offset,
                "off_coset_mass": rep.off_coset_mass,
                "on_coset_max_rel_err": rep.on_coset_max_rel_err,
                "verdict": _verdict(rep.passed),
            }
        )
    return cases, {}


def _suite_lattice_decomposition(cfg: dict, seed: int):
    cells = int(cfg["cells_per_axis"])
    count = int(cfg["count"])
    order = multi_order(1.0, (1,))
    samples = spectral_ensemble(_child(seed, 0), count, 1, kmax=20)
    cases = []
    per_res = []
    for n_res in cfg["resolutions"]:
        spec = make_grid(1, int(n_res))
        part = build_partition(spec, cells)
        fields = realize_ensemble(samples, spec)
        ratios = [lattice_decomposition_ratio(u, part, order) for u in fields]
        c_master = window_multiplier_constant(part.master.field, order)
        cells_total = cells**spec.dim
        lower = cells_total**-0.5
        upper = cells_total**0.5 * c_master
        ok = all(lower * (1.0 - 1e-9) <= r <= upper * (1.0 + 1e-9) for r in ratios)
        per_res.append(ratios)
        cases.append(
            {
                "label": f"two-sided bracket at {n_res} samples, {count} fields",
                "min_ratio": min(ratios),
                "max_ratio": max(ratios),
                "lower": lower,
                "upper": upper,
                "verdict": _verdict(ok),
            }
        )
    drift = max(
        abs(a - b) / max(abs(b), 1e-300) for a, b in zip(per_res[0], per_res[-1])
    )
    cases.append(
        {
            "label": "per-sample ratio stability when the same fields are refined",
            "max_rel_drift": drift,
            "verdict": PASS if drift <= float(cfg["stability_rtol"]) else INCONCLUSIVE,
        }
    )
    return cases, {}


def _suite_h_equals_k2(cfg: dict, seed: int):
    cells = int(cfg["cells_per_axis"])
    count = int(cfg["count"])
    agreement_tol = float(cfg["agreement_tol"])
    order = multi_order(1.0, (1,))
    cases = []
    for n_res in cfg["resolutions"]:
        spec = make_grid(1, int(n_res))
        part = build_partition(spec, cells)
        fields = realize_ensemble(spectral_ensemble(_child(seed, int(n_res)), count, 1, kmax=20), spec)
        c_master = window_multiplier_constant(part.master.field, order)
        cells_total = cells**spec.dim
        lower = cells_total**-0.5
        upper = cells_total**0.5 * c_master
        worst_gap = 0.0
        bracket_ok = True
        for u in fields:
            via_amalgam = h_equals_k2_ratio(u, order, part)
            via_partition = lattice_decomposition_ratio(u, order=order, partition=part)
            worst_gap = max(worst_gap, abs(via_amalgam - via_partition) / max(via_partition, 1e-300))
            bracket_ok = bracket_ok and lower * (1.0 - 1e-9) <= via_amalgam <= upper * (1.0 + 1e-9)
        cases.append(
            {
                "label": f"amalgam route equals partition route at {n_res} samples",
                "max_rel_gap": worst_gap,
                "lower": lower,
                "upper": upper,
                "verdict": _verdict(worst_gap <= agreement_tol and bracket_ok),
            }
        )
    return cases, {}


def _suite_window_independence(cfg: dict, seed: int):
    count = int(cfg["count"])
    lo_br, hi_br = (float(v) for v in cfg["bracket"])
    order = multi_order(1.0, (1,))
    p_values = [_parse_p(p) for p in cfg["p_values"]]
    samples = spectral_ensemble(_child(seed, 0), count, 1, kmax=20)
    cases = []
    track = []
    for n_res in cfg["resolutions"]:
        spec = make_grid(1, int(n_res))
        fields = realize_ensemble(samples, spec)
        w1 = _default_window(spec)
        w2 = _narrow_window(spec)
        for p in p_values:
            rep = window_ratio_check(fields, order, p, w1, w2)
            inside = lo_br <= rep.min_ratio and rep.max_ratio <= hi_br
            if p == 2.0:
                track.append(rep.ratios)
            cases.append(
                {
                    "label": f"window quotient bracket, p={_fmt_p(p)}, {n_res} samples",
                    "min_ratio": rep.min_ratio,
                    "max_ratio": rep.max_ratio,
                    "verdict": PASS if inside else INCONCLUSIVE,
                }
            )
    drift = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(track[0], track[-1]))
    cases.append(
        {
            "label": "per-sample window quotient stability under refinement, p=2",
            "max_rel_drift": drift,
            "verdict": PASS if drift <= float(cfg["stability_rtol"]) else INCONCLUSIVE,
        }
    )
    return cases, {}


def _suite_embedding_chain(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    count = int(cfg["count"])
    fields = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 1, kmax=20), spec)
    order = multi_order(1.0, (1,))
    lower = multi_order(0.5, (1,))
    p_values = [_parse_p(p) for p in cfg["p_values"]]
    window = _default_window(spec)
    p_ok = True
    o_ok = True
    for u in fields:
        rep = embedding_chain_check(u, order, lower, p_values, window)
        p_ok = p_ok and rep.p_chain_ok
        o_ok = o_ok and rep.order_chain_ok
    cases = [
        {
            "label": f"norms decrease along p over {count} fields",
            "verdict": _verdict(p_ok),
        },
        {
            "label": "norms decrease when the order drops",
            "verdict": _verdict(o_ok),
        },
    ]
    order_sup = multi_order(0.75, (1,))
    worst = 0.0
    sup_ok = True
    for u in fields:
        rep = rl_sup_bound_check(u, order_sup)
        ratio_chain = rep.sup <= rep.spectral_l1 * (1.0 + 1e-12) and rep.spectral_l1 <= rep.weighted_bound * (1.0 + 1e-12)
        sup_ok = sup_ok and rep.passed and ratio_chain
        worst = max(worst, rep.sup / max(rep.weighted_bound, 1e-300))
    cases.append(
        {
            "label": "sup norm through the spectrum bound, s=3/4",
            "max_ratio": worst,
            "verdict": _verdict(sup_ok),
        }
    )
    return cases, {}


def _suite_kato_product(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    count = int(cfg["count"])
    us = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 1, kmax=20), spec)
    vs = realize_ensemble(spectral_ensemble(_child(seed, 1), count, 1, kmax=20), spec)
    params = sigma_params((1.0,), (1.0,), (0.25,), (1,))
    window = _default_window(spec)
    rep = kato_product_check(list(zip(us, vs)), params, 2.0, 2.0, window)
    slack = float(cfg["slack"])
    cases = [
        {
            "label": f"windowed product bound over {count} pairs, p=q=2",
            "max_ratio": rep.max_ratio,
            "reference_constant": rep.reference_constant,
            "verdict": _verdict(rep.max_ratio <= rep.reference_constant * slack),
        }
    ]
    return cases, {}


def _suite_retraction(cfg: dict, seed: int):
    cells = int(cfg["cells_per_axis"])
    count = int(cfg["count"])
    tol = float(cfg["tol"])
    order = multi_order(1.0, (1,))
    cases = []
    for n_res in cfg["resolutions"]:
        spec = make_grid(1, int(n_res))
        part = build_partition(spec, cells)
        fields = realize_ensemble(spectral_ensemble(_child(seed, int(n_res)), count, 1, kmax=20), spec)
        worst = 0.0
        ratio = 0.0
        ok = True
        for u in fields:
            rep = retraction_roundtrip(u, part, order, tol=tol)
            worst = max(worst, rep.roundtrip_sup_err)
            ratio = max(ratio, rep.section_norm / max(rep.reference_norm, 1e-300))
            ok = ok and rep.passed
        cases.append(
            {
                "label": f"section reassembly at {n_res} samples, {count} fields",
                "max_roundtrip_sup_err": worst,
                "max_section_ratio": ratio,
                "verdict": _verdict(ok),
            }
        )
    return cases, {}


def _suite_mollifier_rate(cfg: dict, seed: int):
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    moll = make_mollifier(spec)
    window = _default_window(spec)
    epsilons = [float(e) for e in cfg["epsilons"]]
    count = int(cfg["count"])
    kmax = int(cfg["kmax"])
    slope_tol = float(cfg["slope_tol"])
    fit_floor = float(cfg["fit_floor"])
    delta = float(cfg["delta"])
    cases = []
    rows = []
    for pair_index, (s, sp) in enumerate(cfg["pairs"]):
        s = float(s)
        sp = float(sp)
        order_s = multi_order(s, (1,))
        order_sp = multi_order(sp, (1,))
        ens = critical_ensemble(_child(seed, pair_index), count, 1, kmax, s, delta=delta)
        fields = realize_ensemble(ens, spec)
        slopes = []
        bound_ok = True
        young_ok = True
        target = None
        for j, u in enumerate(fields):
            rep = mollifier_rate_check(u, order_s, order_sp, moll, epsilons, window=window)
            # Fit only the upper part of the sweep: below fit_floor the
            # ensemble's finite spectrum has no tail left to lose and the
            # local slope steepens past the predicted rate.
            kept = [(e, err) for e, err in zip(rep.epsilons, rep.errors) if e >= fit_floor]
            log_e = np.log([e for e, _ in kept])
            log_err = np.log([err for _, err in kept])
            slopes.append(float(np.polyfit(log_e, log_err, 1)[0]))
            bound_ok = bound_ok and rep.bound_ok
            young_ok = young_ok and rep.young_ok
            target = rep.slope_target
            if j == 0:
                for e, err, bnd in zip(rep.epsilons, rep.errors, rep.bounds):
                    rows.append([f"{s:g}->{sp:g}", e, err, bnd])
        slope_med = float(np.median(slopes))
        cases.append(
            {
                "label": f"two-power bound and Young contraction, orders {s:g}->{sp:g}",
                "verdict": _verdict(bound_ok and young_ok),
            }
        )
        cases.append(
            {
                "label": f"realized rate on critically regular fields, orders {s:g}->{sp:g}",
                "median_slope": slope_med,
                "slope_target": target,
                "verdict": PASS if abs(slope_med - target) <= slope_tol else INCONCLUSIVE,
            }
        )
    plots = {"mollifier-rate-sweep.csv": (["pair", "epsilon", "error", "bound"], rows)}
    return cases, plots


def _suite_calderon(cfg: dict, seed: int):
    cases = []
    spec = make_grid(1, int(cfg["samples_per_axis"]))
    x = coordinate_axes(spec)[0]
    u0 = field_from_values(spec, 2.0 + np.cos(x))
    us = positive_field(spec, _child(seed, 0))

    res = calderon_apply([u0], holo_identity())
    cases.append(
        {
            "label": "identity reproduced through the contour",
            "pointwise_error": res.pointwise_error,
            "drift": res.drift,
            "verdict": _verdict(res.pointwise_error <= 1e-8 and res.drift <= 1e-9),
        }
    )
    res = calderon_apply([us], holo_square())
    cases.append(
        {
            "label": "square of a seeded positive field",
            "pointwise_error": res.pointwise_error,
            "drift": res.drift,
            "verdict": _verdict(res.pointwise_error <= 1e-8 and res.drift <= 1e-9),
        }
    )
    res = calderon_apply([u0], holo_exp())
    cases.append(
        {
            "label": "exponential of a cosine profile",
            "pointwise_error": res.pointwise_error,
            "drift": res.drift,
            "verdict": _verdict(res.pointwise_error <= 1e-8 and res.drift <= 1e-9),
        }
    )
    inv = invert(us)
    cases.append(
        {
            "label": "reciprocal with certified lower bound",
            "residual": inv.residual,
            "lower_bound": inv.lower_bound,
            "verdict": _verdict(inv.residual <= 1e-8),
        }
    )

    numer = make_bump(spec, [(2.0, 4.0)]).field
    cutoff = make_bump(spec, [(0.05, 6.1)], [(2.0, 4.0)])
    floor = float(np.min(np.abs(us.samples)))
    division = divide(numer, us, cutoff, floor)
    cases.append(
        {
            "label": "quotient on a cutoff neighborhood of the numerator support",
            "residual": division.residual,
            "verdict": _verdict(division.residual <= 1e-7),
        }
    )

    chain = chain_rule_check([us], holo_square())
    cases.append(
        {
            "label": "chain rule for the square, one axis",
            "max_rel_err": chain.max_rel_err,
            "verdict": _verdict(chain.passed),
        }
    )

    spec2 = make_grid(2, int(cfg["samples_per_axis_2d"]), blocks=(2,))
    f1 = positive_field(spec2, _child(seed, 1), kmax=4)
    f2 = positive_field(spec2, _child(seed, 2), kmax=4)
    res2 = calderon_apply([f1, f2], holo_product2())
    cases.append(
        {
            "label": "two-variable product on a plane grid",
            "pointwise_error": res2.pointwise_error,
            "drift": res2.drift,
            "verdict": _verdict(res2.pointwise_error <= 1e-8 and res2.drift <= 1e-9),
        }
    )
    chain2 = chain_rule_check([f1, f2], holo_product2())
    cases.append(
        {
            "label": "chain rule for the two-variable product",
            "max_rel_err": chain2.max_rel_err,
            "verdict": _verdict(chain2.passed),
        }
    )

    attained = (complex(u0.samples[7]), complex(us.samples[7]))
    rep = joint_spectrum_witness([u0, us], attained)
    cases.append(
        {
            "label": "witness refused at an attained value pair",
            "status": rep.status,
            "delta_inf": rep.delta_inf,
            "verdict": _verdict(rep.status == "refused"),
        }
    )
    rep = joint_spectrum_witness([u0, us], (10.0 + 3.0j, -9.0 + 0.0j))
    cases.append(
        {
            "label": "witness produced away from the joint range",
            "status": rep.status,
            "residual": rep.residual,
            "verdict": _verdict(rep.status == "witness" and rep.residual is not None and rep.residual <= 1e-8),
        }
    )

    partials = check_partial_consistency(holo_product2(), seed=_child(seed, 3))
    cases.append(
        {
            "label": "supplied partial derivatives match symmetric differences",
            "max_rel_err": partials.max_rel_err,
            "verdict": _verdict(partials.passed),
        }
    )

    cont = composite_continuity_check([u0], holo_exp(), epsilons=[0.4, 0.2, 0.1, 0.05])
    cases.append(
        {
            "label": "composition gap decreases along the smoothing sweep",
            "gaps": list(cont.gaps),
            "skipped": list(cont.skipped),
            "verdict": PASS if cont.monotone_ok else INCONCLUSIVE,
        }
    )

    try:
        ContourSpec(nodes_per_circle=8)
        misconfig = False
    except ContourConfigError:
        misconfig = True
    cases.append(
        {
            "label": "under-resolved contour configuration is refused",
            "verdict": _verdict(misconfig),
        }
    )

    rows = []
    for nodes in cfg["node_sweep"]:
        probe = ContourSpec(
            nodes_per_circle=int(nodes), tolerance=math.inf, drift_tolerance=math.inf
        )
        res = calderon_apply([u0], holo_exp(), probe)
        rows.append([int(nodes), res.drift, res.pointwise_error])
    plots = {"calderon-nodes.csv": (["nodes", "drift", "pointwise_error"], rows)}
    return cases, plots


def _suite_sw_embedding(cfg: dict, seed: int):
    count = int(cfg["count"])
    order = multi_order(float(cfg["order"]), (1,))
    p_values = [_parse_p(p) for p in cfg["p_values"]]
    bracket = float(cfg["bracket"])
    samples = spectral_ensemble(_child(seed, 0), count, 1, kmax=20)
    cases = []
    track = []
    for n_res in cfg["resolutions"]:
        spec = make_grid(1, int(n_res))
        chi = make_bump(spec, [(0.5, 2.5)], [(1.0, 2.0)])
        chi_tilde = make_bump(spec, [(0.1, 2.9)], [(0.45, 2.55)])
        fields = realize_ensemble(samples, spec)
        for p in p_values:
            rep = sw_embedding_check(fields, order, p, chi, chi_tilde)
            if p == 2.0:
                track.append(rep.ratios)
            if rep.max_ratio <= 1.05:
                verdict = PASS
            elif rep.max_ratio <= bracket:
                verdict = INCONCLUSIVE
            else:
                verdict = FAIL
            cases.append(
                {
                    "label": f"majorant quotient, p={_fmt_p(p)}, {n_res} samples",
                    "max_ratio": rep.max_ratio,
                    "verdict": verdict,
                }
            )
        if int(n_res) == int(cfg["resolutions"][0]):
            dil = dilation_ratio_check(fields[: min(6, count)], 2.0, chi, factor=2)
            finite = math.isfinite(dil.max_volume) and math.isfinite(dil.max_root)
            cases.append(
                {
                    "label": "integer dilation, both candidate prefactors recorded",
                    "max_ratio_volume_exponent": dil.max_volume,
                    "max_ratio_root_exponent": dil.max_root,
                    "verdict": PASS if finite else INCONCLUSIVE,
                }
            )
            try:
                sw_embedding_check(fields[:1], multi_order(0.5, (1,)), 2.0, chi, chi_tilde)
                refused = False
            except HypothesisError:
                refused = True
            cases.append(
                {
                    "label": "non-integrable weight order is refused",
                    "verdict": _verdict(refused),
                }
            )
    drift = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(track[0], track[-1]))
    cases.append(
        {
            "label": "per-sample majorant quotient stability under refinement, p=2",
            "max_rel_drift": drift,
            "verdict": PASS if drift <= float(cfg["stability_rtol"]) else INCONCLUSIVE,
        }
    )
    return cases, {}


def _suite_schatten(cfg: dict, seed: int):
    count = int(cfg["count"])
    hs_tol = float(cfg["hs_tol"])
    taus = [float(t) for t in cfg["taus"]]
    cases = []
    identity_track = []
    for n_res in cfg["resolutions"]:
        n_res = int(n_res)
        period = self_dual_period(n_res)
        sym_spec = make_grid(2, n_res, period=period, blocks=(1, 1))
        order = multi_order((2.0, 2.0), (1, 1))

        worst_hs = 0.0
        families = {}
        for name in ("gaussian", "separable", "random"):
            syms = symbol_family(name, sym_spec, 1, order, _child(seed, n_res + zlib.crc32(name.encode()) % 1000), count)
            families[name] = syms
            for sym in syms:
                for tau in taus:
                    worst_hs = max(worst_hs, hs_identity_gap(sym, tau))
        cases.append(
            {
                "label": f"Hilbert-Schmidt identity across symbol families, {n_res} samples",
                "max_gap": worst_hs,
                "verdict": _verdict(worst_hs <= hs_tol),
            }
        )

        mono_ok = True
        for sym in families["gaussian"]:
            op = quantize(sym, 0.5)
            n1 = schatten_norm(op, 1.0)
            n2 = schatten_norm(op, 2.0)
            ninf = schatten_norm(op, math.inf)
            mono_ok = mono_ok and n1 >= n2 * (1.0 - 1e-12) and n2 >= ninf * (1.0 - 1e-12)
        cases.append(
            {
                "label": f"Schatten norms decrease in p, {n_res} samples",
                "verdict": _verdict(mono_ok),
            }
        )

        ones = field_from_values(sym_spec, np.ones(sym_spec.shape))
        id_sym = make_symbol(ones, 1, order)
        id_op = quantize(id_sym, 0.5)
        id_norm = schatten_norm(id_op, 2.0)
        id_gap = abs(id_norm - math.sqrt(n_res))
        identity_track.append(id_norm)
        cases.append(
            {
                "label": f"constant symbol quantizes to the identity, {n_res} samples",
                "hs_norm": id_norm,
                "exact_value": math.sqrt(n_res),
                "verdict": _verdict(id_gap <= 1e-10 * math.sqrt(n_res)),
            }
        )
        sym0 = families["gaussian"][0]
        op0 = quantize(sym0, 0.5)
        flip = (-np.arange(n_res)) % n_res
        conj = op0.entries[np.ix_(flip, flip)]
        sv_a = np.sort(np.linalg.svd(op0.entries, compute_uv=False))
        sv_b = np.sort(np.linalg.svd(conj, compute_uv=False))
        sv_gap = float(np.max(np.abs(sv_a - sv_b)) / max(float(sv_a[-1]), 1e-300))
        cases.append(
            {
                "label": f"singular values invariant under grid reflection, {n_res} samples",
                "max_rel_gap": sv_gap,
                "verdict": _verdict(sv_gap <= 1e-9),
            }
        )

    growth = identity_track[-1] / max(identity_track[0], 1e-300)
    expected_growth = math.sqrt(int(cfg["resolutions"][-1]) / int(cfg["resolutions"][0]))
    cases.append(
        {
            "label": "constant symbol: Hilbert-Schmidt norm grows like the square root of the dimension",
            "growth": growth,
            "expected_growth": expected_growth,
            "verdict": _verdict(abs(growth - expected_growth) <= 1e-10 * expected_growth),
        }
    )

    bound_track = []
    center_box = tuple(float(v) for v in cfg["center_box"])
    width_range = tuple(float(v) for v in cfg["width_range"])
    for n_res in cfg["bound_resolutions"]:
        n_res = int(n_res)
        period = self_dual_period(n_res)
        sym_spec = make_grid(2, n_res, period=period, blocks=(1, 1))
        syms = symbol_family(
            "gaussian",
            sym_spec,
            1,
            multi_order((2.0, 2.0), (1, 1)),
            _child(seed, 11),
            count,
            center_box=center_box,
            width_range=width_range,
        )
        window = make_bump(sym_spec, [(1.0, 9.0)] * 2, [(3.0, 7.0)] * 2)
        rep = schatten_bound_check(syms, 1.0, 0.5, window, ContinuousScheme(16))
        bound_track.append(rep.ratios)
        cases.append(
            {
                "label": f"trace-class quotient against the windowed symbol norm, {n_res} samples",
                "max_ratio": rep.max_ratio,
                "verdict": PASS if math.isfinite(rep.max_ratio) else INCONCLUSIVE,
            }
        )
    drift = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(bound_track[0], bound_track[-1]))
    cases.append(
        {
            "label": "per-symbol trace-class quotient stability on localized symbols",
            "max_rel_drift": drift,
            "verdict": PASS if drift <= float(cfg["stability_rtol"]) else INCONCLUSIVE,
        }
    )

    n_res = int(cfg["resolutions"][0])
    period = self_dual_period(n_res)
    sym_spec = make_grid(2, n_res, period=period, blocks=(1, 1))
    sweep_sym = symbol_family("gaussian", sym_spec, 1, multi_order((2.0, 2.0), (1, 1)), _child(seed, 7), 1)[0]
    sweep = tau_sweep_check(sweep_sym, 2.0)
    cases.append(
        {
            "label": "Schatten distance grows along the tau sweep",
            "gaps": list(sweep.gaps_from_first),
            "verdict": PASS if sweep.monotone_ok else INCONCLUSIVE,
        }
    )
    return cases, {}


def _suite_coordinate_change(cfg: dict, seed: int):
    spec = make_grid(2, int(cfg["samples_per_axis"]), blocks=(2,))
    count = int(cfg["count"])
    tol = float(cfg["tol"])
    fields = realize_ensemble(spectral_ensemble(_child(seed, 0), count, 2, kmax=6), spec)
    multipliers = [
        ("linear", lambda t: t),
        ("square root weight", lambda t: np.sqrt(1.0 + t)),
        ("heat factor", lambda t: np.exp(-t)),
    ]
    isometries = all_isometries(2)
    worst = 0.0
    ok = True
    for u in fields:
        for _, b in multipliers:
            for iso in isometries:
                rep = coordinate_change_check(u, b, iso, tol=tol)
                worst = max(worst, rep.sup_err)
                ok = ok and rep.passed
    cases = [
        {
            "label": f"commutation over {len(isometries)} isometries and {len(multipliers)} multipliers",
            "max_sup_err": worst,
            "verdict": _verdict(ok),
        }
    ]
    try:
        isometry_from_matrix(np.array([[0.8, -0.6], [0.6, 0.8]]))
        refused = False
    except HypothesisError:
        refused = True
    cases.append(
        {
            "label": "non-lattice rotation is refused",
            "verdict": _verdict(refused),
        }
    )
    rot = isometry_from_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))
    mat = np.linalg.matrix_power(rot.matrix(), 4)
    cases.append(
        {
            "label": "quarter turn has order four",
            "verdict": _verdict(bool(np.array_equal(mat, np.eye(2)))),
        }
    )
    return cases, {}


_DEFAULTS: dict[str, dict] = {
    "peetre": {"samples": 100_000, "max_dim": 4, "order_bound": 3.0, "scale": 50.0},
    "weight-conv": {"box": 24.0, "step": 0.05, "probes_per_block": 17},
    "spectral-exactness": {"samples_per_axis": 64, "tol": 1e-10},
    "exact-identities": {"samples_per_axis": 128, "count": 8, "tol": 1e-10, "hs_tol": 1e-8},
    "window-bound": {"samples_per_axis": 128, "count": 20},
    "sobolev-product": {"samples_per_axis": 128, "count": 12},
    "twisted-periodization": {"samples_per_axis": 128, "cells_per_axis": 4},
    "lattice-decomposition": {
        "resolutions": [128, 256],
        "count": 50,
        "cells_per_axis": 4,
        "stability_rtol": 0.10,
    },
    "h-equals-k2": {
        "resolutions": [128, 256],
        "count": 16,
        "cells_per_axis": 4,
        "agreement_tol": 1e-10,
    },
    "window-independence": {
        "resolutions": [128, 256],
        "count": 50,
        "p_values": [1.0, 2.0, "inf"],
        "bracket": [0.02, 50.0],
        "stability_rtol": 0.10,
    },
    "embedding-chain": {"samples_per_axis": 128, "count": 10, "p_values": [1.0, 2.0, 4.0, "inf"]},
    "kato-product": {"samples_per_axis": 128, "count": 10, "slack": 1.05},
    "retraction": {"resolutions": [128, 256], "count": 8, "cells_per_axis": 4, "tol": 1e-10},
    "mollifier-rate": {
        "samples_per_axis": 1024,
        "count": 8,
        "kmax": 500,
        "delta": 0.02,
        "epsilons": [0.4, 0.2828, 0.2, 0.1414, 0.1, 0.0707, 0.05],
        "pairs": [[2.0, 1.0], [1.5, 1.0], [1.0, 0.75]],
        "slope_tol": 0.1,
        "fit_floor": 0.1,
    },
    "calderon": {
        "samples_per_axis": 256,
        "samples_per_axis_2d": 32,
        "node_sweep": [16, 24, 32, 48, 64],
    },
    "sw-embedding": {
        "resolutions": [128, 256],
        "count": 50,
        "p_values": [1.0, 2.0],
        "order": 1.5,
        "bracket": 10.0,
        "stability_rtol": 0.10,
    },
    "schatten": {
        "resolutions": [16, 32],
        "bound_resolutions": [32, 64],
        "count": 6,
        "taus": [0.0, 0.5, 1.0],
        "hs_tol": 1e-8,
        "center_box": [1.5, 5.5],
        "width_range": [0.5, 0.9],
        "stability_rtol": 0.10,
    },
    "coordinate-change": {"samples_per_axis": 32, "count": 5, "tol": 1e-11},
}

_CLAIMS: dict[str, str] = {
    "peetre": "the two-sided weight quotient stays at or below one for every split order",
    "weight-conv": "truncated weight convolutions stay below their closed-form constants",
    "spectral-exactness": "plane waves are exact eigenvectors of weight multipliers, derivatives, and quantized frequency multipliers",
    "exact-identities": "derivative norm splits, partition retraction, and the Hilbert-Schmidt identity hold to stated precision",
    "window-bound": "window and periodic multiplier constants bound the weighted norm of a product",
    "sobolev-product": "products of field pairs obey the split-order bound with the closed-form constant",
    "twisted-periodization": "phase-twisted lattice periodizations occupy a single frequency coset",
    "lattice-decomposition": "the square-summed lattice localization stays inside its two-sided bracket",
    "h-equals-k2": "the sliding-window route and the partition route to the quadratic amalgam norm agree",
    "window-independence": "amalgam norms built from two admissible windows differ by a bounded, stable factor",
    "embedding-chain": "amalgam norms decrease along the integrability exponent and along the order",
    "kato-product": "windowed norms of products obey the split-order bound with the explicit reference constant",
    "retraction": "localized sections reassemble the field exactly with comparable section norms",
    "mollifier-rate": "smoothing errors obey the explicit two-power bound and realize the predicted rate",
    "calderon": "the contour calculus reproduces identity, square, exponential, reciprocal, and quotient values with stable quadrature",
    "sw-embedding": "the sliding-window modulation norm is controlled by the explicit windowed majorant",
    "schatten": "quantized symbols obey the Hilbert-Schmidt identity, Schatten monotonicity, and reflection-invariant singular values",
    "coordinate-change": "radial frequency multipliers commute with every signed axis permutation",
}

_SUITES: dict[str, Callable[[dict, int], tuple[list, dict]]] = {
    "peetre": _suite_peetre,
    "weight-conv": _suite_weight_conv,
    "spectral-exactness": _suite_spectral_exactness,
    "exact-identities": _suite_exact_identities,
    "window-bound": _suite_window_bound,
    "sobolev-product": _suite_sobolev_product,
    "twisted-periodization": _suite_twisted_periodization,
    "lattice-decomposition": _suite_lattice_decomposition,
    "h-equals-k2": _suite_h_equals_k2,
    "window-independence": _suite_window_independence,
    "embedding-chain": _suite_embedding_chain,
    "kato-product": _suite_kato_product,
    "retraction": _suite_retraction,
    "mollifier-rate": _suite_mollifier_rate,
    "calderon": _suite_calderon,
    "sw-embedding": _suite_sw_embedding,
    "schatten": _suite_schatten,
    "coordinate-change": _suite_coordinate_change,
}


# ---------------------------------------------------------------------------
# serialization helpers


def _parse_p(raw) -> float:
    if isinstance(raw, str):
        if raw.strip().lower() in ("inf", "infinity", "oo"):
            return math.inf
        return float(raw)
    return float(raw)


def _fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return repr(obj)
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
    path.write_text(text, encoding="ascii")


def _write_cases_csv(path: Path, cases: list[dict]) -> None:
    columns: list[str] = []
    for case in cases:
        for key in case:
            if key not in columns:
                columns.append(key)
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for case in cases:
            writer.writerow(["" if case.get(c) is None else case.get(c) for c in columns])


def _write_plot_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _environment() -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


# ---------------------------------------------------------------------------
# commands


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read config {path}: {exc}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"malformed config JSON at byte {exc.pos}: {exc.msg}")
    if not isinstance(cfg, dict):
        raise _UsageError("config top level must be an object")
    unknown = set(cfg) - {"seed", "suites"}
    if unknown:
        raise _UsageError(f"unknown config keys: {sorted(unknown)}")
    suites = cfg.get("suites", {})
    if not isinstance(suites, dict):
        raise _UsageError("config key 'suites' must be an object")
    for sid, overrides in suites.items():
        if sid not in _SUITES:
            raise _UsageError(f"unknown suite in config: {sid!r}")
        if not isinstance(overrides, dict):
            raise _UsageError(f"config for suite {sid!r} must be an object")
        bad = set(overrides) - set(_DEFAULTS[sid])
        if bad:
            raise _UsageError(f"unknown options for suite {sid!r}: {sorted(bad)}")
    return cfg


class _UsageError(Exception):
    pass


def _thread_count() -> int:
    raw = os.environ.get("KATOKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"KATOKIT_THREADS must be an integer, got {raw!r}")
    return max(1, value)


def _run_suite(sid: str, cfg_all: dict, base_seed: int):
    cfg = dict(_DEFAULTS[sid])
    cfg.update(cfg_all.get("suites", {}).get(sid, {}))
    seed = _suite_seed(base_seed, sid)
    cases, plots = _SUITES[sid](cfg, seed)
    verdict = _aggregate([c["verdict"] for c in cases])
    report = {
        "suite": sid,
        "claim": _CLAIMS[sid],
        "seed": seed,
        "config": cfg,
        "cases": cases,
        "verdict": verdict,
        "environment": _environment(),
    }
    return report, plots


def cmd_verify(args) -> int:
    cfg_all = _load_config(args.config)
    base_seed = args.seed if args.seed is not None else int(cfg_all.get("seed", 0))
    suite_ids = list(_SUITES) if args.suite == "all" else [args.suite]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    threads = _thread_count()
    if threads > 1 and len(suite_ids) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda sid: _run_suite(sid, cfg_all, base_seed), suite_ids))
    else:
        results = [_run_suite(sid, cfg_all, base_seed) for sid in suite_ids]

    verdicts = {}
    for report, plots in results:
        sid = report["suite"]
        _write_json(out / f"{sid}.json", report)
        _write_cases_csv(out / f"{sid}-cases.csv", report["cases"])
        for fname, (header, rows) in plots.items():
            _write_plot_csv(out / fname, header, rows)
        verdicts[sid] = report["verdict"]
        print(f"{sid:24s} {report['verdict']}")
    overall = _aggregate(list(verdicts.values()))
    _write_json(out / "summary.json", {"verdicts": verdicts, "overall": overall, "seed": base_seed})
    print(f"{'overall':24s} {overall}")
    return 1 if overall == FAIL else 0


def _parse_interval_list(raw: str, dim: int, what: str) -> list[tuple[float, float]]:
    parts = [float(v) for v in raw.split(",")]
    if len(parts) == 2:
        return [(parts[0], parts[1])] * dim
    if len(parts) != 2 * dim:
        raise _UsageError(f"{what} needs 2 or {2 * dim} comma-separated numbers, got {len(parts)}")
    return [(parts[2 * a], parts[2 * a + 1]) for a in range(dim)]


def cmd_compute(args) -> int:
    field = load_field(args.field)
    spec = field.spec
    kind = args.kind

    order = None
    if args.order is not None:
        values = [float(v) for v in args.order.split(",")]
        if len(values) == 1:
            values = values * len(spec.blocks)
        order = multi_order(values, spec.blocks)
    elif kind in ("h-norm", "kato-norm"):
        order = multi_order([1.0] * len(spec.blocks), spec.blocks)

    if kind == "l2":
        value = l2_norm(field)
    elif kind == "sup":
        value = sup_norm(field)
    elif kind == "h-norm":
        value = h_norm(field, order)
    elif kind in ("kato-norm", "sw-norm"):
        if args.window_support:
            support = _parse_interval_list(args.window_support, spec.dim, "--window-support")
            plateau = None
            if args.window_plateau:
                plateau = _parse_interval_list(args.window_plateau, spec.dim, "--window-plateau")
            window = make_bump(spec, support, plateau)
        else:
            window = _default_window(spec)
        p = _parse_p(args.p)
        if kind == "sw-norm":
            value = sw_norm(field, p, window, args.points_per_axis)
        else:
            scheme = (
                LatticeScheme(args.cells)
                if args.cells is not None
                else ContinuousScheme(args.points_per_axis)
            )
            value = kato_norm(field, amalgam_spec(order, p, window, scheme))
    elif kind == "schatten":
        if spec.dim % 2 != 0:
            raise HypothesisError("schatten needs a symbol field with an even number of axes")
        space_dim = spec.dim // 2
        sym = make_symbol(field, space_dim, multi_order([0.0] * len(spec.blocks), spec.blocks))
        value = schatten_norm(quantize(sym, args.tau), _parse_p(args.p))
    else:  # pragma: no cover - argparse restricts choices
        raise _UsageError(f"unknown compute kind {kind!r}")

    print(f"{value:.12g}")
    if args.json:
        payload = {
            "kind": kind,
            "field": str(args.field),
            "value": value,
            "parameters": {
                "order": None if order is None else list(order.s),
                "p": _fmt_p(_parse_p(args.p)) if kind in ("kato-norm", "sw-norm", "schatten") else None,
                "tau": args.tau if kind == "schatten" else None,
            },
        }
        _write_json(Path(args.json), payload)
    return 0


def _collect_reports(path: Path) -> list[dict]:
    if path.is_dir():
        reports = []
        for child in sorted(path.glob("*.json")):
            payload = _read_report_json(child)
            if isinstance(payload, dict) and "cases" in payload:
                reports.append(payload)
        if not reports:
            raise _UsageError(f"no suite reports with cases found under {path}")
        return reports
    payload = _read_report_json(path)
    if isinstance(payload, list):
        return [p for p in payload if isinstance(p, dict) and "cases" in p]
    if not isinstance(payload, dict) or "cases" not in payload:
        raise _UsageError(f"{path} does not contain a suite report (missing 'cases')")
    return [payload]


def _read_report_json(path: Path):
    try:
        raw = path.read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read report {path}: {exc}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"malformed report JSON in {path} at byte {exc.pos}: {exc.msg}")


_NUMERIC_HINTS = (
    "max_ratio",
    "max_err",
    "max_rel_err",
    "max_gap",
    "max_rel_gap",
    "max_sup_err",
    "residual",
    "drift",
    "pointwise_error",
    "median_slope",
    "roundtrip_sup_err",
    "max_roundtrip_sup_err",
    "tail_fraction",
)


def cmd_report(args) -> int:
    reports = _collect_reports(Path(args.path))
    worst = PASS
    for report in reports:
        verdict = report.get("verdict", INCONCLUSIVE)
        if verdict in _SEVERITY and _SEVERITY[verdict] > _SEVERITY[worst]:
            worst = verdict
        print(f"{report.get('suite', '?'):24s} {verdict}")
        print(f"  claim: {report.get('claim', '')}")
        for case in report.get("cases", []):
            detail = ""
            for key in _NUMERIC_HINTS:
                if key in case:
                    value = case[key]
                    detail = f"  [{key}={value:.6g}]" if isinstance(value, (int, float)) else f"  [{key}={value}]"
                    break
            print(f"  - {case.get('verdict', '?'):12s} {case.get('label', '')}{detail}")
    if args.csv:
        columns = ["suite"]
        rows = []
        for report in reports:
            for case in report.get("cases", []):
                for key in case:
                    if key not in columns:
                        columns.append(key)
                rows.append((report.get("suite", "?"), case))
        with Path(args.csv).open("w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for sid, case in rows:
                writer.writerow([sid] + ["" if case.get(c) is None else case.get(c) for c in columns[1:]])
    return 1 if worst == FAIL else 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="katokit",
        description="norms, claim suites, and reports for sampled fields on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="evaluate one norm on a stored field")
    p_compute.add_argument(
        "kind", choices=["l2", "sup", "h-norm", "kato-norm", "sw-norm", "schatten"]
    )
    p_compute.add_argument("--field", required=True, help="path to a stored field (FLD1)")
    p_compute.add_argument("--order", help="comma-separated order, one value per block or a single value")
    p_compute.add_argument("--p", default="2", help="integrability exponent, number or 'inf'")
    p_compute.add_argument("--tau", type=float, default=0.5, help="quantization parameter for schatten")
    p_compute.add_argument("--points-per-axis", type=int, default=None, help="translation grid density")
    p_compute.add_argument("--cells", type=int, default=None, help="use the lattice scheme with this many cells per axis")
    p_compute.add_argument("--window-support", help="window support as lo,hi (per axis or shared)")
    p_compute.add_argument("--window-plateau", help="window plateau as lo,hi (per axis or shared)")
    p_compute.add_argument("--json", help="also write the value and parameters to this JSON file")
    p_compute.set_defaults(func=cmd_compute)

    p_verify = sub.add_parser("verify", help="run a claim suite and write reports")
    p_verify.add_argument("suite", choices=sorted(_SUITES) + ["all"])
    p_verify.add_argument("--config", help="JSON file with {seed, suites:{name:{option:value}}}")
    p_verify.add_argument("--out", default="katokit-reports", help="output directory")
    p_verify.add_argument("--seed", type=int, default=None, help="base seed (overrides config)")
    p_verify.set_defaults(func=cmd_verify)

    p_report = sub.add_parser("report", help="render stored reports as a table")
    p_report.add_argument("path", help="a report JSON file or a directory of them")
    p_report.add_argument("--csv", help="also write all cases to this CSV file")
    p_report.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KatokitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
