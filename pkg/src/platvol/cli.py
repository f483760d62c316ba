"""Command-line front end.

Plats are given in the text format ``B<2n>: i1 i2 ...`` (strand count, then
signed crossing indices).  Exit codes: 0 success, 1 computational failure
(diagnostic JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .braids import BraidWord, PlatPresentation, wirtinger_presentation
from .cache import ResultCache, RunManifest, arc_record, canonical_json
from .errors import PlatvolError
from .knots import (
    alexander_polynomial,
    alexander_root_angles,
    connected_sum_check,
    invariance_suite,
    torus_arc_count,
    torus_endpoints,
    torus_integral,
    torus_omega_dtheta,
    torus_total_mass,
)
from .solver import SolverConfig, find_all_at_trace, find_arcs
from .volume import integrate_arc, omega_value

_DEFAULT_CACHE = os.environ.get("PLATVOL_CACHE_DIR", os.path.expanduser("~/.cache/platvol"))


def _parse_plat(text: str, ambient_flip: bool) -> PlatPresentation:
    plat = PlatPresentation.from_braid(BraidWord.parse(text))
    if ambient_flip:
        plat = plat.with_ambient_sign(-1)
    return plat


def _config(seed: int, tol: float) -> SolverConfig:
    return SolverConfig(seed=seed, residual_tol=tol)


def _emit(data: dict, as_json: bool, csv_rows=None, csv_header=None):
    if as_json:
        click.echo(canonical_json(data))
    elif csv_rows is not None:
        click.echo(",".join(csv_header))
        for row in csv_rows:
            click.echo(",".join(format(v, ".17g") if isinstance(v, float) else str(v) for v in row))
    else:
        click.echo(json.dumps(data, indent=2, sort_keys=True))


def _fail(err: Exception) -> None:
    diag = {"error": type(err).__name__, "message": str(err)}
    click.echo(json.dumps(diag), err=True)
    sys.exit(1)


@click.group()
@click.version_option(__version__)
def main():
    """Representation curves of plat-closure knots and their density."""


_common = [
    click.option("--seed", default=0, show_default=True, help="RNG seed (runs are deterministic per seed)"),
    click.option("--tol", default=1e-12, show_default=True, help="solver residual tolerance"),
    click.option("--cache-dir", default=_DEFAULT_CACHE, show_default=False, help="result cache directory"),
    click.option("--json", "as_json", is_flag=True, help="canonical JSON output"),
    click.option("--csv", "as_csv", is_flag=True, help="CSV output where applicable"),
    click.option("--ambient-flip", is_flag=True, help="flip the ambient orientation (negates the density)"),
]


def common_options(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


def _arcs_with_cache(plat, cfg, cache_dir):
    cache = ResultCache(cache_dir)
    manifest = RunManifest(
        plat_text=plat.text()
        + f"|orient={plat.orientation}|alt={plat.alternate_splitting}|amb={plat.ambient_sign}",
        config=cfg.to_dict(),
        seed=cfg.seed,
    )
    cached = cache.load_or_warn(manifest)
    if cached is not None:
        return None, cached, cache, manifest
    arcs = find_arcs(plat, cfg)
    records = [arc_record(a, integrate_arc(plat, a, cfg)) for a in arcs]
    cache.store(manifest, records)
    return arcs, records, cache, manifest


@main.command()
@click.argument("plat_text")
@common_options
def arcs(plat_text, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Trace every arc of the regular curve of PLAT_TEXT."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        cfg = _config(seed, tol)
        _, records, _, manifest = _arcs_with_cache(plat, cfg, cache_dir)
        data = {"plat": plat.text(), "hash": manifest.content_hash(), "arcs": records}
        rows = []
        for k, rec in enumerate(records):
            for s in rec["samples"]:
                rows.append((k, s["theta_m"], s["omega_dtheta"], s["sign"], s["residual"]))
        if as_csv:
            _emit(data, False, rows, ["arc", "theta_m", "omega_dtheta", "sign", "residual"])
        else:
            _emit(data, as_json)
    except PlatvolError as err:
        _fail(err)


@main.command()
@click.argument("plat_text")
@click.option("--theta", type=float, required=True, help="meridian angle in (0, pi)")
@common_options
def volume(plat_text, theta, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Pointwise density at a fixed meridian angle."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        cfg = _config(seed, tol)
        pts = find_all_at_trace(plat, theta, cfg)
        data = {
            "plat": plat.text(),
            "theta_m": theta,
            "points": [
                {
                    "omega_dtheta": omega_value(p.data) if p.regular else None,
                    "regular": p.regular,
                    "h0": p.h0,
                    "h1": p.h1,
                    "invariants": list(p.invariants),
                    "residual": p.residual,
                }
                for p in pts
            ],
        }
        _emit(data, as_json)
    except PlatvolError as err:
        _fail(err)


@main.command()
@click.argument("plat_text")
@common_options
def integrate(plat_text, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Total mass of the curve against increasing meridian angle."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        cfg = _config(seed, tol)
        _, records, _, _ = _arcs_with_cache(plat, cfg, cache_dir)
        total = sum(r["integral"]["value"] for r in records)
        err_sum = sum(r["integral"]["error"] for r in records)
        data = {
            "plat": plat.text(),
            "total": total,
            "error": err_sum,
            "per_arc": [r["integral"] for r in records],
        }
        _emit(data, as_json)
        if not as_json:
            click.echo(f"integral = {total:.6f} +- {err_sum:.2e}")
    except PlatvolError as err:
        _fail(err)


@main.command()
@click.argument("plat_text")
@click.option(
    "--moves",
    default="stabilize,halfbraid,mirror,reverse_orientation,alternate_splitting,ambient_flip",
    show_default=True,
    help="comma-separated move list",
)
@common_options
def invariance(plat_text, moves, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Re-derive the density after each move and report deviations."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        cfg = _config(seed, tol)
        rep = invariance_suite(plat, moves.split(","), cfg)
        data = {
            "plat": rep.plat_text,
            "passed": rep.passed,
            "moves": [
                {
                    "move": m.move,
                    "expected_sign": m.expected_sign,
                    "max_deviation": m.max_deviation,
                    "arcs_matched": m.arcs_matched,
                    "passed": m.passed,
                    "note": m.note,
                }
                for m in rep.moves
            ],
        }
        _emit(data, as_json)
        sys.exit(0 if rep.passed else 1)
    except PlatvolError as err:
        _fail(err)


@main.group()
def catalog():
    """Closed-form reference values."""


@catalog.command("torus")
@click.option("--q", type=int, required=True, help="odd crossing number of the width-4 torus plat")
@click.option("--json", "as_json", is_flag=True)
def catalog_torus(q, as_json):
    """Closed-form arc table of the width-4 torus knots."""
    try:
        rows = []
        for ell in range(1, torus_arc_count(q) + 1):
            lo, hi = torus_endpoints(q, ell)
            rows.append(
                {
                    "arc": ell,
                    "omega_dtheta": torus_omega_dtheta(q, ell),
                    "theta_lo": lo,
                    "theta_hi": hi,
                }
            )
        data = {
            "q": q,
            "arcs": rows,
            "parametrized_integral": torus_integral(q),
            "angle_mass": torus_total_mass(q),
        }
        _emit(data, as_json)
    except ValueError as err:
        click.echo(str(err), err=True)
        sys.exit(2)


@main.command()
@click.argument("plat_text")
@common_options
def alexander(plat_text, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Alexander polynomial of the plat closure."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        delta = alexander_polynomial(wirtinger_presentation(plat))
        data = {
            "plat": plat.text(),
            "coefficients": list(delta.coeffs),
            "display": str(delta),
            "root_angles": alexander_root_angles(delta),
        }
        _emit(data, as_json)
    except PlatvolError as err:
        _fail(err)


@main.command("verify-all")
@click.argument("plat_text")
@common_options
def verify_all(plat_text, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Arcs, integral, Alexander data and the full invariance suite."""
    try:
        plat = _parse_plat(plat_text, ambient_flip)
        cfg = _config(seed, tol)
        _, records, _, _ = _arcs_with_cache(plat, cfg, cache_dir)
        delta = alexander_polynomial(wirtinger_presentation(plat))
        rep = invariance_suite(plat, config=cfg)
        data = {
            "plat": plat.text(),
            "alexander": list(delta.coeffs),
            "arcs": records,
            "total_mass": sum(r["integral"]["value"] for r in records),
            "invariance": {
                "passed": rep.passed,
                "moves": [
                    {"move": m.move, "max_deviation": m.max_deviation, "passed": m.passed}
                    for m in rep.moves
                ],
            },
        }
        _emit(data, as_json)
        sys.exit(0 if rep.passed else 1)
    except PlatvolError as err:
        _fail(err)


@main.command("connected-sum")
@click.argument("plat_a")
@click.argument("plat_b")
@common_options
def connected_sum(plat_a, plat_b, seed, tol, cache_dir, as_json, as_csv, ambient_flip):
    """Pullback check of the density on the composite of two plats."""
    try:
        p1 = _parse_plat(plat_a, ambient_flip)
        p2 = _parse_plat(plat_b, ambient_flip)
        cfg = _config(seed, tol)
        rep = connected_sum_check(p1, p2, cfg)
        data = {
            "plat": rep.plat_text,
            "max_deviation": rep.max_deviation,
            "points": len(rep.points),
            "mixed_point_regular": rep.mixed_point_regular,
            "mixed_point_h1": rep.mixed_point_h1,
            "integral": rep.integral,
            "excluded_angles": {
                "factor1": rep.excluded_angles_factor1,
                "factor2": rep.excluded_angles_factor2,
            },
        }
        _emit(data, as_json)
    except PlatvolError as err:
        _fail(err)


if __name__ == "__main__":
    main()
