"""Command-line interface: ``convexbench <command> [options]``.

Commands that act on bodies read a body file (one body object, a list of
them, or ``{"bodies": [...]}``) or, without a file, generate the zoo given
by ``--dims`` and ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bodies import body_from_dict
from .zoo import SUITES, ZooSpec, _json_value, format_value, generate_zoo, run_suite, version


def _dims(s):
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims expects comma-separated integers, got {s!r}")


def _vec(v):
    return json.dumps([_json_value(x) for x in np.asarray(v, dtype=float)])


def load_bodies(path):
    """``[(body_id, body)]`` from a body JSON file."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict) and "bodies" in data:
        data = data["bodies"]
    if isinstance(data, dict):
        data = [data]
    return [(d.get("id", f"body{i}"), body_from_dict(d)) for i, d in enumerate(data)]


def _bodies(args):
    if getattr(args, "bodies", None):
        return load_bodies(args.bodies)
    return generate_zoo(ZooSpec(dims=args.dims, seed=args.seed), labeled=True)


def _emit(rows, columns, args, meta=None):
    """Write rows as CSV or JSON to ``--out`` or stdout."""
    if args.format == "json":
        doc = {"tool_version": version(), "seed": args.seed, **(meta or {}),
               "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows]}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = [f"# convexbench {version()} command={args.command} seed={args.seed}"]
        text_rows = [columns] + [[format_value(r.get(c)) for c in columns] for r in rows]
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(text_rows)
        text = "\n".join(lines) + "\n" + buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_zoo(args):
    if args.action != "gen":
        raise SystemExit(f"unknown zoo action {args.action!r}")
    zoo = generate_zoo(ZooSpec(dims=args.dims, seed=args.seed), labeled=True)
    doc = {"tool_version": version(), "seed": args.seed,
           "bodies": [{"id": bid, **K.to_dict()} for bid, K in zoo]}
    text = json.dumps(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_vol(args):
    from .randgeom import SampleConfig, exact_volume, mc_volume

    rows = []
    for bid, K in _bodies(args):
        row = {"body_id": bid, "n": K.dim, "volume": exact_volume(K) if K.dim <= 8 else None}
        if args.samples:
            v, se = mc_volume(K, SampleConfig(seed=args.seed, n_samples=args.samples))
            row.update(mc_volume=v, mc_stderr=se)
        rows.append(row)
    _emit(rows, ["body_id", "n", "volume", "mc_volume", "mc_stderr"], args)
    return 0


def cmd_isotropize(args):
    from .randgeom import isotropic_constant, isotropic_transform

    rows, images = [], []
    for bid, K in _bodies(args):
        T, image = isotropic_transform(K)
        rows.append({"body_id": bid, "n": K.dim, "L": isotropic_constant(K), "det_map": float(np.linalg.det(T.linear))})
        images.append({"id": bid, **image.to_dict(), "map": {"linear": T.linear.tolist(), "shift": T.shift.tolist()}})
    if args.images:
        Path(args.images).write_text(json.dumps({"bodies": images}) + "\n")
    _emit(rows, ["body_id", "n", "L", "det_map"], args)
    return 0


def cmd_santalo(args):
    from .santalo import volume_product

    rows = []
    for bid, K in _bodies(args):
        vp = volume_product(K, center="santalo", body_id=bid)
        rows.append({"body_id": bid, "n": K.dim, "point": _vec(vp.center),
                     "s": vp.s, "s_ratio": vp.s_ratio, "mahler": vp.mahler})
    _emit(rows, ["body_id", "n", "point", "s", "s_ratio", "mahler"], args)
    return 0


def cmd_mahler_scan(args):
    from .santalo import thm_3_3_scan

    rep = thm_3_3_scan(_bodies(args), eps=args.eps, seed=args.seed)
    cols = ["body_id", "n", "symmetric", "n_s_root", "s_ratio", "L_T", "sandwich_inner", "sandwich_outer",
            "sandwich_ok", "polar_ok", "floor_ok"]
    _emit(rep["rows"], cols, args, {"floor": rep["floor"], "pass": rep["pass"]})
    return 0 if rep["pass"] else 1


def cmd_klartag(args):
    from .laplace import klartag_body

    rows = []
    for bid, K in _bodies(args):
        pr = klartag_body(K, eps=args.eps, seed=args.seed)
        rows.append({"body_id": bid, "n": K.dim, **pr.to_dict(), "sandwich_ok": pr.sandwich_ok})
        rows[-1]["xi_star"] = _vec(pr.xi_star)
        rows[-1]["x"] = _vec(pr.x)
    cols = ["body_id", "n", "eps", "xi_star", "x", "detcov", "target", "certified", "sandwich_inner",
            "sandwich_outer", "L_T", "sandwich_ok"]
    _emit(rows, cols, args)
    return 0 if all(r["certified"] and r["sandwich_ok"] for r in rows) else 1


def cmd_mellipsoid(args):
    from .mposition import m_ellipsoid

    kw = {"n_samples": args.samples} if args.samples else {}
    certs = [m_ellipsoid(K, body_id=bid, seed=args.seed, eps=args.eps, **kw) for bid, K in _bodies(args)]
    if args.format == "json":
        text = json.dumps({"tool_version": version(), "seed": args.seed,
                           "certificates": [c.to_dict() for c in certs]}, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        rows = [{"body_id": c.body_id, "n": c.ellipsoid.dim, "a": c.a, "beta_measured": c.beta_measured,
                 "volumes_equal": c.volumes_equal, **c.covering, "ok": c.ok} for c in certs]
        _emit(rows, ["body_id", "n", "a", "beta_measured", "volumes_equal", "K_in_E", "E_in_K",
                     "Kpolar_in_Epolar", "Epolar_in_Kpolar", "ok"], args)
    return 0 if all(c.ok for c in certs) else 1


def cmd_verify(args):
    spec = ZooSpec(dims=args.dims, seed=args.seed)
    formats = ("csv", "json") if args.format is None else (args.format,)
    rep = run_suite(args.suite, spec, out=args.out or ".", samples=args.samples or 20_000,
                    workers=args.workers, formats=formats)
    for name, rows in rep.tables.items():
        bad = sum(not r["pass"] for r in rows)
        print(f"{args.suite}/{name}: {len(rows) - bad}/{len(rows)} rows pass")
    print("PASS" if rep.passed else "FAIL")
    return rep.exit_code


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dims", type=_dims, default=(2, 3, 4, 5), help="comma-separated dimensions of the zoo")
    common.add_argument("--samples", type=int, default=0, help="Monte Carlo / net sample size (0: command default)")
    common.add_argument("--out", default=None, help="output file (directory for verify)")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    p = argparse.ArgumentParser(prog="convexbench", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"convexbench {version()}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zoo", parents=[common], help="generate the body zoo")
    z.add_argument("action", choices=("gen",))
    z.set_defaults(func=cmd_zoo)

    for name, func, helptext in (
        ("vol", cmd_vol, "exact (and optional Monte Carlo) volumes"),
        ("isotropize", cmd_isotropize, "isotropic constants and isotropic images"),
        ("santalo", cmd_santalo, "Santalo points and volume products"),
        ("mahler-scan", cmd_mahler_scan, "perturbation pipeline and volume-product floor"),
        ("klartag", cmd_klartag, "tilted perturbation with small isotropic constant"),
        ("mellipsoid", cmd_mellipsoid, "M-ellipsoid certificates"),
    ):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("bodies", nargs="?", help="body JSON file (default: generated zoo)")
        if name in ("mahler-scan", "klartag", "mellipsoid"):
            c.add_argument("--eps", type=float, default=0.5)
        if name == "isotropize":
            c.add_argument("--images", default=None, help="write isotropic images to this JSON file")
        c.set_defaults(func=func)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite and write its report")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command != "verify" and args.format is None:
        args.format = "csv"
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
