"""Body zoo generation and the reproducible verification suites.

A suite runs one family of checks over a zoo and returns an
:class:`ExperimentReport`. Reports are written as one CSV per table plus a
single JSON document; every float is rounded to 12 significant digits so
that reruns with the same seed produce byte-identical files. Wall time is
deliberately left out of the artifacts.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bodies import (
    AffineMap,
    HPolytope,
    VPolytope,
    ball,
    cross_polytope,
    cube,
    difference_body,
    simplex,
)
from .errors import DegenerateSample
from .integrals import polynomial_moments
from .randgeom import SampleConfig, exact_volume, mc_volume

log = logging.getLogger(__name__)

FAMILIES = ("cube", "cross_polytope", "simplex", "random_symmetric_hull", "zonotope", "random_hpoly")
SHORT_NAMES = {
    "cube": "cube",
    "cross_polytope": "cross",
    "simplex": "simplex",
    "random_symmetric_hull": "symhull",
    "zonotope": "zonotope",
    "random_hpoly": "hpoly",
}
SUITES = ("volumes", "covering", "santalo", "klartag", "mposition", "full-chain")
MAX_DIM = 8
MAX_ATTEMPTS = 20
SIG_DIGITS = 12

__all__ = [
    "ExperimentReport",
    "FamilySpec",
    "SUITES",
    "ZooSpec",
    "default_zoo",
    "format_value",
    "generate_zoo",
    "run_suite",
    "version",
]


def version():
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as _v

    try:
        return _v("convexbench")
    except PackageNotFoundError:  # pragma: no cover - running from a bare checkout
        return "0+unknown"


# ---------------------------------------------------------------------------
# zoo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    """One family in a zoo; ``param`` is the point, segment or facet count (``None`` picks the default)."""

    name: str
    count: int = 1
    param: int | None = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown family {self.name!r}; expected one of {FAMILIES}")
        if self.count < 1:
            raise ValueError("count must be positive")

    def default_param(self, n):
        if self.param is not None:
            return self.param
        return {"random_symmetric_hull": n + 3, "zonotope": n + 2, "random_hpoly": 2 * n + 2}.get(self.name)


@dataclass(frozen=True)
class ZooSpec:
    """Families times dimensions, generated from one seed.

    ``families`` accepts family names, ``(name, count)`` / ``(name, count, param)``
    tuples, dicts with the same keys, or :class:`FamilySpec` objects.
    """

    families: tuple = ()
    dims: tuple = (2, 3, 4, 5)
    seed: int = 0
    center: bool = True

    def __post_init__(self):
        fams = tuple(_family(f) for f in (self.families or DEFAULT_FAMILIES))
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        for n in self.dims:
            if not 2 <= n <= MAX_DIM:
                raise ValueError(f"zoo dimensions must lie in [2, {MAX_DIM}], got {n}")

    def to_dict(self):
        return {
            "families": [{"name": f.name, "count": f.count, "param": f.param} for f in self.families],
            "dims": list(self.dims),
            "seed": self.seed,
            "center": self.center,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(families=tuple(d.get("families", ())), dims=tuple(d.get("dims", (2, 3, 4, 5))),
                   seed=int(d.get("seed", 0)), center=bool(d.get("center", True)))


def _family(f):
    if isinstance(f, FamilySpec):
        return f
    if isinstance(f, str):
        return FamilySpec(f)
    if isinstance(f, dict):
        return FamilySpec(f["name"], int(f.get("count", 1)), f.get("param"))
    return FamilySpec(*f)


DEFAULT_FAMILIES = (
    FamilySpec("cube"),
    FamilySpec("cross_polytope"),
    FamilySpec("simplex"),
    FamilySpec("random_symmetric_hull", 3),
    FamilySpec("zonotope", 2),
)


def default_zoo(dims=(2, 3, 4, 5), seed=0):
    return ZooSpec(DEFAULT_FAMILIES, dims, seed)


def _check_full_dim(P, n, what):
    s = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    if len(s) < n or s[n - 1] <= 1e-3 * s[0]:
        raise DegenerateSample(f"{what} is not full-dimensional")


def _zonotope(G):
    signs = np.array(list(itertools.product([-1.0, 1.0], repeat=len(G))))
    return VPolytope(signs @ G)


def _random_body(name, n, param, rng):
    if name == "random_symmetric_hull":
        P = rng.standard_normal((param, n))
        _check_full_dim(np.vstack([P, -P]), n, "symmetric hull")
        return VPolytope(np.vstack([P, -P]))
    if name == "zonotope":
        G = rng.standard_normal((param, n))
        _check_full_dim(np.vstack([G, -G]), n, "zonotope")
        return _zonotope(G)
    if name == "random_hpoly":
        A = rng.standard_normal((param, n))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        # bounded iff the normals positively span, i.e. 0 is interior to their hull
        if param <= n or VPolytope(A).interior_margin(np.zeros(n)) <= 1e-3:
            raise DegenerateSample("facet normals do not positively span")
        return HPolytope(A, np.ones(param))
    raise ValueError(name)


def _make(fam, code, n, i, seed):
    if fam.name == "cube":
        return cube(n)
    if fam.name == "cross_polytope":
        return cross_polytope(n)
    if fam.name == "simplex":
        return simplex(n, centered=True)
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(code, n, i, attempt)))
        try:
            return _random_body(fam.name, n, fam.default_param(n), rng)
        except DegenerateSample as exc:
            log.warning("%s n=%d #%d attempt %d: %s; retrying", fam.name, n, i, attempt, exc)
    raise DegenerateSample(f"{fam.name} n={n} #{i}: no valid sample in {MAX_ATTEMPTS} attempts")


def _centered(K):
    vol, m1, _ = polynomial_moments(K.simplices)
    bar = m1 / vol
    if np.linalg.norm(bar) <= 1e-12:
        return K
    return K.translate(-bar)


def generate_zoo(spec=None, labeled=False):
    """Bodies of a :class:`ZooSpec`, ordered by (family, n, index).

    Symmetric families are centered at 0 by construction; with
    ``spec.center`` the others are translated to their barycenter. Ids look
    like ``cube-n3`` or ``symhull-n3-0``. With ``labeled=True`` the result
    is a list of ``(body_id, body)`` pairs.

    Raises
    ------
    DegenerateSample
        if a random family keeps producing flat samples.
    """
    spec = spec if spec is not None else default_zoo()
    out = []
    for fam in spec.families:
        code = FAMILIES.index(fam.name)
        for n in spec.dims:
            for i in range(fam.count):
                K = _make(fam, code, n, i, spec.seed)
                if spec.center and fam.name == "random_hpoly":
                    K = _centered(K)
                short = SHORT_NAMES[fam.name]
                bid = f"{short}-n{n}" if fam.count == 1 else f"{short}-n{n}-{i}"
                out.append((bid, K))
    return out if labeled else [K for _, K in out]


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def format_value(v):
    """CSV cell text: floats to 12 significant digits, booleans lowercase."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v + 0.0:.{SIG_DIGITS}g}"
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v + 0.0:.{SIG_DIGITS}g}") if math.isfinite(v) else format_value(v)
    return v


@dataclass
class ExperimentReport:
    """Rows of one suite run, grouped into tables with fixed column order."""

    suite: str
    seed: int
    zoo: dict
    samples: int
    tables: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)
    tool_version: str = field(default_factory=version)

    @property
    def passed(self):
        return all(bool(r["pass"]) for rows in self.tables.values() for r in rows)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def failures(self):
        return [(name, r) for name, rows in self.tables.items() for r in rows if not r["pass"]]

    def add(self, name, columns, rows):
        if name in self.tables:
            raise ValueError(f"duplicate table {name!r}")
        self.columns[name] = list(columns)
        self.tables[name] = [{c: r.get(c) for c in columns} for r in rows]

    def csv_text(self, name):
        buf = io.StringIO()
        buf.write(f"# convexbench {self.tool_version} suite={self.suite} table={name} seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns[name])
        for r in self.tables[name]:
            w.writerow([format_value(r[c]) for c in self.columns[name]])
        return buf.getvalue()

    def to_dict(self):
        return {
            "suite": self.suite,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "samples": self.samples,
            "zoo": self.zoo,
            "pass": self.passed,
            "tables": {
                name: {
                    "columns": self.columns[name],
                    "rows": [{c: _json_value(r[c]) for c in self.columns[name]} for r in rows],
                }
                for name, rows in self.tables.items()
            },
        }

    def json_text(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def write(self, out, formats=("csv", "json")):
        """Write ``<suite>-<table>.csv`` files and ``<suite>.json`` under directory ``out``."""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        stem = self.suite
        if "csv" in formats:
            for name in self.tables:
                p = out / f"{stem}-{name}.csv"
                p.write_text(self.csv_text(name))
                paths.append(p)
        if "json" in formats:
            p = out / f"{stem}.json"
            p.write_text(self.json_text())
            paths.append(p)
        return paths


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _suite_volumes(rep, zoo, seed, samples, workers):
    cfg = SampleConfig(seed=seed, n_samples=samples)

    def row(item):
        bid, K = item
        n = K.dim
        v = exact_volume(K)
        mc, se = mc_volume(K, cfg)
        rs = exact_volume(difference_body(K)) / v
        rs_ok = 2**n * (1 - 1e-9) <= rs <= math.comb(2 * n, n) * (1 + 1e-9)
        mc_ok = abs(mc - v) <= 3 * se + 1e-9 * v
        return {
            "body_id": bid, "n": n, "volume": v, "mc_volume": mc, "mc_stderr": se,
            "z_score": (mc - v) / se if se > 0 else 0.0, "rogers_shephard": rs,
            "mc_ok": mc_ok, "rogers_shephard_ok": rs_ok, "pass": bool(mc_ok and rs_ok),
        }

    rep.add("volumes",
            ["body_id", "n", "volume", "mc_volume", "mc_stderr", "z_score", "rogers_shephard",
             "mc_ok", "rogers_shephard_ok", "pass"],
            _map(row, zoo, workers))


COVERING_TS = (0.5, 1.0, 2.0)
COVERING_MAX_DIM = 4


def _suite_covering(rep, zoo, seed, samples, workers):
    from .covering import (
        dual_covering_check,
        equal_volume_symmetry,
        hull_volume_check,
        lemma_4_2_check,
        verify_lemma_2_1,
    )

    zoo = [(b, K) for b, K in zoo if K.dim <= COVERING_MAX_DIM]
    kw = {"n_samples": samples, "audit_samples": max(samples // 10, 1000)}

    def body_rows(item):
        bid, K = item
        n = K.dim
        Bn = ball(n)
        rows = []
        r = verify_lemma_2_1(K, Bn, COVERING_TS, seed=seed, **kw)
        for x in r["rows"]:
            rows.append({"body_id": bid, "other_id": "ball", "check": "mean_gauge_entropy", "t": x["t"],
                         "lower": x["lower"], "upper": x["upper"], "value": x["log_upper"],
                         "bound_rhs": x["bound_rhs"], "pass": x["pass"]})
        d = dual_covering_check(K, COVERING_TS, seed=seed, audit_points=200, **kw)
        rows.append({"body_id": bid, "other_id": "ball", "check": "dual_sup_ratio", "t": None,
                     "lower": d["supA"], "upper": d["supB"], "value": d["ratio"],
                     "bound_rhs": d["bound"], "pass": d["pass"]})
        return rows

    rows = [r for rs in _map(body_rows, zoo, workers) for r in rs]

    by_dim = {}
    for bid, K in zoo:
        by_dim.setdefault(K.dim, []).append((bid, K))
    pairs = []
    for n, items in sorted(by_dim.items()):
        for (a, K), (b, L) in zip(items, items[1:] + items[:1]):
            pairs.append((a, K, b, L))

    def pair_rows(item):
        a, K, b, L = item
        n = K.dim
        out = []
        reach = float(np.max(K.gauge(_points(L))))
        h = hull_volume_check(K, L, reach, seed=seed, allow_asymmetric=True, **kw)
        out.append({"body_id": a, "other_id": b, "check": "hull_volume", "t": 1.0, "lower": h["hull_volume"],
                    "upper": h["N_upper"], "value": h["ratio"], "bound_rhs": h["rhs"], "pass": h["pass"]})
        Ls = L if L.is_symmetric() else difference_body(L)
        c = lemma_4_2_check(K, Ls, seed=seed, **kw)
        out.append({"body_id": a, "other_id": b if Ls is L else b + "-diff", "check": "entropy_chain", "t": 1.0,
                    "lower": c["sum_ratio"] / 2**n, "upper": c["N_upper"], "value": c["N_upper"],
                    "bound_rhs": 1.3 * 2**n * c["packing_ratio"], "pass": c["pass"]})
        scale = (exact_volume(K) / exact_volume(L)) ** (1.0 / n)
        Le = L.affine_image(AffineMap.from_linear(scale * np.eye(n)))
        e = equal_volume_symmetry(K, Le, seed=seed, allow_asymmetric=True, **kw)
        out.append({"body_id": a, "other_id": b, "check": "equal_volume_symmetry", "t": 1.0,
                    "lower": e["N_LK"], "upper": e["N_KL"], "value": e["ratio"], "bound_rhs": e["bound"],
                    "pass": e["pass"]})
        return out

    rows += [r for rs in _map(pair_rows, pairs, workers) for r in rs]
    rep.add("covering", ["body_id", "other_id", "check", "t", "lower", "upper", "value", "bound_rhs", "pass"], rows)


def _points(K):
    return K.vertices if hasattr(K, "vertices") else K.to_vpolytope().vertices


MAHLER_CLASSES = ("cube", "cross", "zonotope")


def _suite_santalo(rep, zoo, seed, samples, workers):
    from .santalo import prop_3_1_check, santalo_solve, volume_product

    def row(item):
        bid, K = item
        n = K.dim
        vp = volume_product(K, body_id=bid)
        resid = 0.0 if vp.center_used == "origin" else santalo_solve(K).residual
        p = prop_3_1_check(K, body_id=bid)
        sym = K.is_symmetric()
        mahler_class = bid.split("-")[0] in MAHLER_CLASSES
        floor_ok = vp.n_s_root >= 8.0 if sym else True
        mahler_ok = vp.mahler_ok if mahler_class else True
        ok = vp.santalo_ok and p["pass"] and floor_ok and mahler_ok
        return {
            "body_id": bid, "n": n, "symmetric": sym, "center": vp.center_used, "s": vp.s,
            "s_ratio": vp.s_ratio, "n_s_root": vp.n_s_root, "mahler": vp.mahler, "L": p["L"],
            "c1_measured": p["c1_measured"], "santalo_residual": resid, "santalo_ok": vp.santalo_ok,
            "mahler_ok": mahler_ok, "floor_ok": floor_ok, "c1_ok": p["pass"], "pass": bool(ok),
        }

    rep.add("santalo",
            ["body_id", "n", "symmetric", "center", "s", "s_ratio", "n_s_root", "mahler", "L", "c1_measured",
             "santalo_residual", "santalo_ok", "mahler_ok", "floor_ok", "c1_ok", "pass"],
            _map(row, zoo, workers))


L_T_FLOOR = 0.6


def _suite_klartag(rep, zoo, seed, samples, workers, eps=0.5):
    from .laplace import klartag_body

    def row(item):
        bid, K = item
        pr = klartag_body(K, eps=eps, seed=seed)
        ok = pr.certified and pr.sandwich_ok and pr.L_T <= L_T_FLOOR
        return {
            "body_id": bid, "n": K.dim, "eps": eps, "xi_norm": float(np.linalg.norm(pr.xi_star)),
            "detcov": pr.detcov, "target": pr.target, "certified": pr.certified,
            "sandwich_inner": pr.sandwich_inner, "sandwich_outer": pr.sandwich_outer,
            "sandwich_bound": 1.02 * math.exp(2 * eps), "L_T": pr.L_T, "sandwich_ok": pr.sandwich_ok,
            "pass": bool(ok),
        }

    rep.add("klartag",
            ["body_id", "n", "eps", "xi_norm", "detcov", "target", "certified", "sandwich_inner",
             "sandwich_outer", "sandwich_bound", "L_T", "sandwich_ok", "pass"],
            _map(row, zoo, workers))


def _suite_mposition(rep, zoo, seed, samples, workers):
    from .mposition import (
        BETA_FLOOR,
        m_ellipsoid,
        needle_pancake_control,
        reverse_bm_check,
        santalo_from_mposition,
    )

    kw = {"n_samples": samples, "audit_samples": max(samples // 10, 1000)}

    def cert_row(item):
        bid, K = item
        c = m_ellipsoid(K, body_id=bid, seed=seed, **kw)
        s = santalo_from_mposition(K, c)
        row = {
            "body_id": bid, "n": K.dim, "a": c.a, "L_T": c.L_T, "volumes_equal": c.volumes_equal,
            "beta_measured": c.beta_measured, "beta_bound": BETA_FLOOR, **c.covering,
            "s": s["s"], "s_lower": s["lower"], "s_upper": s["upper"], "root_ratio": s["root_ratio"],
            "root_bound": s["root_bound"], "cert_ok": c.ok, "sandwich_ok": s["pass"],
            "pass": bool(c.ok and s["pass"]),
        }
        return row, K.affine_image(c.position_map)

    results = _map(cert_row, zoo, workers)
    rep.add("certificates",
            ["body_id", "n", "a", "L_T", "volumes_equal", "beta_measured", "beta_bound", "K_in_E", "E_in_K",
             "Kpolar_in_Epolar", "Epolar_in_Kpolar", "s", "s_lower", "s_upper", "root_ratio", "root_bound",
             "cert_ok", "sandwich_ok", "pass"],
            [r for r, _ in results])

    positioned = [(bid, Kt) for (bid, _), (_, Kt) in zip(zoo, results)]
    pairs = [(a, K, b, L) for (a, K), (b, L) in itertools.combinations(positioned, 2) if K.dim == L.dim]

    def bm_row(item):
        a, K, b, L = item
        r = reverse_bm_check(K, L, positioned=True)
        return {"body_id": a, "other_id": b, "n": K.dim, **r["ratios"], "max_ratio": r["max_ratio"],
                "bound": 8.0, "pass": r["pass"]}

    rows = _map(bm_row, pairs, workers)
    ctrl = needle_pancake_control()
    rows.append({"body_id": "needle-n2", "other_id": "pancake-n2", "n": 2, "K1+K2": ctrl, "max_ratio": ctrl,
                 "bound": 5.0, "pass": ctrl > 5.0})
    rep.add("reverse_bm",
            ["body_id", "other_id", "n", "K1+K2", "K1o+K2", "K1+K2o", "K1o+K2o", "max_ratio", "bound", "pass"],
            rows)


_RUNNERS = {
    "volumes": (_suite_volumes,),
    "covering": (_suite_covering,),
    "santalo": (_suite_santalo,),
    "klartag": (_suite_klartag,),
    "mposition": (_suite_mposition,),
    "full-chain": (_suite_volumes, _suite_covering, _suite_klartag, _suite_santalo, _suite_mposition),
}


def run_suite(name, spec=None, out=None, samples=20_000, workers=1, formats=("csv", "json")):
    """Run a verification suite over a zoo and optionally write its report.

    Parameters
    ----------
    name : {'volumes', 'covering', 'santalo', 'klartag', 'mposition', 'full-chain'}
    spec : ZooSpec, optional
        defaults to the default zoo.
    out : path, optional
        output directory; nothing is written when omitted.
    samples : int
        Monte Carlo and net sample size.
    workers : int
        rows run on a thread pool of this size; row order does not depend on it.

    Returns
    -------
    ExperimentReport
        per-row failures are recorded in the rows, never raised.
    """
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    spec = spec if spec is not None else default_zoo()
    zoo = generate_zoo(spec, labeled=True)
    rep = ExperimentReport(suite=name, seed=spec.seed, zoo=spec.to_dict(), samples=samples)
    for runner in _RUNNERS[name]:
        runner(rep, zoo, spec.seed, samples, workers)
    if out is not None:
        rep.write(out, formats)
    return rep
