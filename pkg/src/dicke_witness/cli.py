"""Command line experiments.

Every experiment writes ``<name>.csv`` (with a ``#`` header block holding the
configuration hash, the package version and the column units), a
``<name>.config.json`` echo of the full configuration and, with ``--svg``, a
small line plot.  Rows whose witness could not be evaluated reliably (an
inconclusive separable bound, a Fock cutoff that is too small) are kept and
carry a non-empty ``flag`` column; the process then exits with status 2.

Exit codes: 0 success, 2 finished with flagged rows, 1 failure.

Examples
--------
::

    dicke-witness fig1 --N 16
    dicke-witness --out-dir runs fig2 --g-grid 0:3:31
    dicke-witness fig6 --svg
    dicke-witness witness state.json --witness xi_new Q mu_SR --out report.json
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .criteria import (DETECTION_TOLERANCE, INCONCLUSIVE, INVALID, ModePair, WitnessReport,
                       gn_wavefunction, linear_entropy_Q, mandel_q_field, mu_HZ, mu_SR,
                       mu_SR_from_moments, mu_spin, single_mode_witness, xi_new,
                       xi_new_from_moments, xi_spin)
from .hilbert import CollectiveState, StateValidationError, random_state
from .models import (BECParams, DickeParams, SuperradianceParams, bec_ground_state,
                     decay_kernel, dicke_ground_state, evolve, sample_positions,
                     single_excitation_moments, timed_dicke_initial)
from .separable import EtaCache, OptimizerConfig

log = logging.getLogger("dicke_witness")

EXIT_OK, EXIT_FAILURE, EXIT_PARTIAL = 0, 1, 2

UNITS = {
    "fig1": {"m": "1", "Q": "1", "xi_new": "1", "eta": "1", "varR": "1"},
    "fig2": {"g/g_c": "1", "n_per_N": "photons per particle", "Sz": "1", "Q": "1",
             "xi_spin": "1", "xi_new": "1"},
    "fig3": {"g/g_c": "1", "mu_SR": "1", "mu_HZ": "1", "mu_spin": "1"},
    "fig4": {"g/g_c": "1", "g2": "1", "g3": "1", "g4": "1", "mandel_q_field": "photons",
             "eq4_witness": "photons"},
    "fig5": {"U/(N*omega_exc)": "1", "m_star": "1", "xi_new": "1", "g2": "1"},
    "fig6": {"t*gamma": "1/gamma", "sum_beta_sq": "1", "xi_new": "1", "mu_SR": "1"},
    "fig6_calibration": {"t*N*gamma": "1/(N gamma)", "sum_beta_sq": "1", "exp(-N*gamma*t)": "1",
                         "rel_err": "1"},
    "random-scan": {"index": "1", "Q": "1", "xi_new": "1", "detected": "bool"},
}


# ---------------------------------------------------------------------------
# configuration and output plumbing
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Everything that determines an experiment's output bytes."""

    experiment: str
    N: int
    grid: list = field(default_factory=list)
    seed: int = 0
    tol: float = DETECTION_TOLERANCE
    phased: bool = True
    eq4_variant: str = "central_moment"
    lamb_shift: bool = False
    full_scale: bool = False
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(seed=self.seed)


def parse_grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid {text!r} is not start:stop:num")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise argparse.ArgumentTypeError("grid needs at least one point")
        return [round(float(x), 12) for x in np.linspace(a, b, n)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def write_csv(path: str, name: str, cfg: ExperimentConfig, columns: Sequence[str], rows) -> None:
    units = UNITS.get(name, {})
    buf = io.StringIO()
    buf.write(f"# dicke-witness {name} version={__version__}\n")
    buf.write(f"# config_sha256={cfg.digest()}\n")
    buf.write("# units: " + "; ".join(f"{c} [{units.get(c, '-')}]" for c in columns if c != "flag") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_config(path: str, cfg: ExperimentConfig) -> None:
    echo = {"config": cfg.to_dict(), "config_sha256": cfg.digest(), "version": __version__}
    with open(path, "w") as fh:
        json.dump(echo, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_svg(path: str, x: Sequence[float], series: dict, xlabel: str) -> None:
    """Stacked line plots, one panel per series, no plotting dependency."""
    W, H, pad = 640, 170, 48
    x = np.asarray(x, dtype=float)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H * len(series) + 30}" '
             f'font-family="sans-serif" font-size="11">']
    xmin, xmax = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    xspan = xmax - xmin or 1.0
    for i, (label, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        top = i * H + 10
        ok = np.isfinite(y)
        lo, hi = (float(y[ok].min()), float(y[ok].max())) if ok.any() else (0.0, 1.0)
        if hi == lo:
            lo, hi = lo - 1, hi + 1
        def px(v):
            return pad + (v - xmin) / xspan * (W - 2 * pad)

        def py(v):
            return top + (H - 30) - (v - lo) / (hi - lo) * (H - 40)
        parts.append(f'<rect x="{pad}" y="{top}" width="{W - 2 * pad}" height="{H - 30}" '
                     f'fill="none" stroke="#999"/>')
        if lo < 0 < hi:
            parts.append(f'<line x1="{pad}" x2="{W - pad}" y1="{py(0):.2f}" y2="{py(0):.2f}" '
                         f'stroke="#ccc" stroke-dasharray="4 3"/>')
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
        parts.append(f'<text x="{pad + 4}" y="{top + 13}">{label}</text>')
        parts.append(f'<text x="4" y="{top + 10}">{fmt(hi)}</text>')
        parts.append(f'<text x="4" y="{top + H - 32}">{fmt(lo)}</text>')
    parts.append(f'<text x="{W / 2:.0f}" y="{H * len(series) + 20}">{xlabel}  '
                 f'[{fmt(xmin)}, {fmt(xmax)}]</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _flag(*reports: WitnessReport) -> str:
    bad = sorted({f"{r.name}:{r.verdict}" for r in reports if r.verdict in (INCONCLUSIVE, INVALID)})
    return ";".join(bad)


def _run_points(func: Callable, points: Sequence, cfg: ExperimentConfig, cache: EtaCache,
                workers: int) -> list[dict]:
    """Evaluate ``func(point, cfg, cache_snapshot)`` over the grid, in grid order.

    Each call returns ``(row, new_cache_entries)``; entries are merged into the
    shared cache so that reruns reuse bound evaluations.
    """
    snapshot = dict(cache.data)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(func, points, [cfg] * len(points), [snapshot] * len(points)))
    else:
        results = [func(p, cfg, snapshot) for p in points]
    rows = []
    for row, entries in results:
        cache.data.update(entries)
        rows.append(row)
    return rows


def _local_cache(snapshot: dict) -> EtaCache:
    c = EtaCache()
    c.data = dict(snapshot)
    return c


def _new_entries(c: EtaCache, snapshot: dict) -> dict:
    return {k: v for k, v in c.data.items() if k not in snapshot}


# ---------------------------------------------------------------------------
# per-point evaluators (top level so that worker processes can import them)
# ---------------------------------------------------------------------------

def _fig1_point(m, cfg, snap):
    cache = _local_cache(snap)
    st = CollectiveState.dicke(cfg.N, m)
    rep = xi_new(st, cfg.optimizer(), cache, cfg.tol)
    row = {"m": m, "Q": linear_entropy_Q(st), "xi_new": rep.value,
           "eta": -rep.terms["minus_eta"], "varR": rep.terms["var_R"], "flag": _flag(rep)}
    return row, _new_entries(cache, snap)


def _dicke_state(cfg, ratio):
    g_c = DickeParams(cfg.N, 0.0).g_c
    return dicke_ground_state(DickeParams(cfg.N, ratio * g_c))


def _fig2_point(ratio, cfg, snap):
    cache = _local_cache(snap)
    gs = _dicke_state(cfg, ratio)
    xs = xi_spin(gs.state, cfg.tol)
    xn = xi_new(gs.state, cfg.optimizer(), cache, cfg.tol)
    row = {"g/g_c": ratio, "n_per_N": gs.n_per_N, "Sz": gs.Sz, "Q": linear_entropy_Q(gs.state),
           "xi_spin": xs.value, "xi_new": xn.value, "flag": _flag(xn)}
    return row, _new_entries(cache, snap)


def _fig3_point(ratio, cfg, snap):
    gs = _dicke_state(cfg, ratio)
    a, b, c = mu_SR(gs.state, tol=cfg.tol), mu_HZ(gs.state, tol=cfg.tol), mu_spin(gs.state, cfg.tol)
    row = {"g/g_c": ratio, "mu_SR": a.value, "mu_HZ": b.value, "mu_spin": c.value,
           "flag": _flag(a, b, c)}
    return row, {}


def _fig4_point(ratio, cfg, snap):
    gs = _dicke_state(cfg, ratio)
    eq4 = single_mode_witness(gs.state, cfg.eq4_variant, tol=cfg.tol)
    row = {"g/g_c": ratio, "mandel_q_field": mandel_q_field(gs.state), "eq4_witness": eq4.value,
           "flag": _flag(eq4)}
    for k in (2, 3, 4):
        row[f"g{k}"] = gn_wavefunction(gs.state, ModePair(), k)
    return row, {}


def _fig5_point(u, cfg, snap):
    cache = _local_cache(snap)
    omega = cfg.options["omega_exc"]
    p = BECParams.from_total_interaction(cfg.N, omega, u * cfg.N * omega)
    gs = bec_ground_state(p)
    rep = xi_new(gs.state, cfg.optimizer(), cache, cfg.tol)
    row = {"U/(N*omega_exc)": u, "m_star": gs.m_star, "xi_new": rep.value,
           "g2": gn_wavefunction(gs.state, ModePair(), 2),
           "flag": ";".join(x for x in (_flag(rep), "tie" if gs.tie else "") if x)}
    return row, _new_entries(cache, snap)


def _fig6_point(item, cfg, snap):
    t, state = item
    cache = _local_cache(snap)
    mom = single_excitation_moments(state, phased=cfg.phased)
    xn = xi_new_from_moments(mom["collective"], cfg.optimizer(), cache, cfg.tol, phased=cfg.phased)
    mu = mu_SR_from_moments(mom["sr"], cfg.tol)
    row = {"t*gamma": t, "sum_beta_sq": mom["population"], "xi_new": xn.value, "mu_SR": mu.value,
           "flag": _flag(xn, mu)}
    return row, _new_entries(cache, snap)


def _scan_point(i, cfg, snap):
    cache = _local_cache(snap)
    o = cfg.options
    st = random_state(o["kind"], cfg.N, [cfg.seed, i], allow_large=o["allow_large"])
    rep = xi_new(st, cfg.optimizer(), cache, cfg.tol)
    row = {"index": i, "Q": linear_entropy_Q(st), "xi_new": rep.value, "detected": rep.detected,
           "flag": _flag(rep)}
    return row, _new_entries(cache, snap)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _finish(name: str, cfg: ExperimentConfig, columns, rows, out_dir: str, svg: bool,
            xcol: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, f"{name}.csv"), name, cfg, columns, rows)
    write_config(os.path.join(out_dir, f"{name}.config.json"), cfg)
    if svg:
        ys = {c: [float(r[c]) for r in rows] for c in columns if c not in (xcol, "flag")}
        write_svg(os.path.join(out_dir, f"{name}.svg"), [float(r[xcol]) for r in rows], ys, xcol)
    flagged = sum(1 for r in rows if r.get("flag"))
    log.info("%s: %d rows, %d flagged -> %s", name, len(rows), flagged, out_dir)
    return EXIT_PARTIAL if flagged else EXIT_OK


def run_fig1(args, cache) -> int:
    N = args.N
    grid = [k - N / 2 for k in range(N + 1)]
    cfg = _base_config(args, "fig1", N, grid)
    rows = _run_points(_fig1_point, grid, cfg, cache, args.threads)
    return _finish("fig1", cfg, ["m", "Q", "xi_new", "eta", "varR", "flag"], rows, args.out_dir,
                   args.svg, "m")


def _run_dicke_scan(args, cache, name, func, columns) -> int:
    cfg = _base_config(args, name, args.N, args.g_grid)
    rows = _run_points(func, cfg.grid, cfg, cache, args.threads)
    return _finish(name, cfg, ["g/g_c", *columns, "flag"], rows, args.out_dir, args.svg, "g/g_c")


def run_fig2(args, cache) -> int:
    return _run_dicke_scan(args, cache, "fig2", _fig2_point, ["n_per_N", "Sz", "Q", "xi_spin", "xi_new"])


def run_fig3(args, cache) -> int:
    return _run_dicke_scan(args, cache, "fig3", _fig3_point, ["mu_SR", "mu_HZ", "mu_spin"])


def run_fig4(args, cache) -> int:
    return _run_dicke_scan(args, cache, "fig4", _fig4_point,
                           ["g2", "g3", "g4", "mandel_q_field", "eq4_witness"])


def run_fig5(args, cache) -> int:
    cfg = _base_config(args, "fig5", args.N, args.u_grid, omega_exc=args.omega_exc)
    rows = _run_points(_fig5_point, cfg.grid, cfg, cache, args.threads)
    return _finish("fig5", cfg, ["U/(N*omega_exc)", "m_star", "xi_new", "g2", "flag"], rows,
                   args.out_dir, args.svg, "U/(N*omega_exc)")


def fig6_calibration(N: int, gamma: float = 1.0, points: int = 21, span: float = 5.0):
    """Coincident atoms: the symmetric state decays as ``exp(-N gamma t)``."""
    pos = np.zeros((N, 3))
    M = decay_kernel(pos, gamma)
    t = np.linspace(0.0, span / (N * gamma), points)
    tr = evolve(M, timed_dicke_initial(pos), t)
    exact = np.exp(-N * gamma * t)
    return [{"t*N*gamma": float(N * gamma * ti), "sum_beta_sq": float(pop), "exp(-N*gamma*t)": float(e),
             "rel_err": float(abs(pop - e) / e), "flag": ""}
            for ti, pop, e in zip(t, tr.population, exact)]


def run_fig6(args, cache) -> int:
    N = 2000 if args.full_scale else args.N
    t_grid = [round(float(x), 12) for x in np.linspace(0.0, args.t_max, args.t_points)]
    cfg = _base_config(args, "fig6", N, t_grid, radius=args.radius)
    p = SuperradianceParams(N=N, radius=args.radius, lamb_shift=args.lamb_shift, seed=args.seed,
                            t_grid=tuple(t_grid))
    pos = sample_positions(p)
    tr = evolve(decay_kernel(pos, p.gamma, p.k0, p.lamb_shift), timed_dicke_initial(pos, p.k0), p.t_grid)
    rows = _run_points(_fig6_point, list(zip(t_grid, tr.states())), cfg, cache, args.threads)
    status = _finish("fig6", cfg, ["t*gamma", "sum_beta_sq", "xi_new", "mu_SR", "flag"], rows,
                     args.out_dir, args.svg, "t*gamma")
    cal_cfg = _base_config(args, "fig6_calibration", N, [], geometry="coincident")
    cal = fig6_calibration(N, p.gamma)
    _finish("fig6_calibration", cal_cfg, ["t*N*gamma", "sum_beta_sq", "exp(-N*gamma*t)", "rel_err", "flag"],
            cal, args.out_dir, False, "t*N*gamma")
    np.savetxt(os.path.join(args.out_dir, "fig6_positions.csv"), pos / p.wavelength, delimiter=",",
               header="x,y,z [lambda0]", fmt="%.12g")
    return status


def run_random_scan(args, cache) -> int:
    grid = list(range(args.count))
    cfg = _base_config(args, "random-scan", args.N, [], count=args.count, kind=args.kind,
                       allow_large=args.allow_large)
    rows = _run_points(_scan_point, grid, cfg, cache, args.threads)
    det = sum(1 for r in rows if r["detected"])
    log.info("random-scan: %d of %d states detected by xi_new", det, len(rows))
    status = _finish("random-scan", cfg, ["index", "Q", "xi_new", "detected", "flag"], rows,
                     args.out_dir, False, "index")
    if args.svg:
        write_svg(os.path.join(args.out_dir, "random-scan.svg"), [r["Q"] for r in rows],
                  {"xi_new": [r["xi_new"] for r in rows]}, "Q")
    return status


WITNESSES = ("Q", "xi_new", "xi_spin", "mu_SR", "mu_HZ", "mu_spin", "eq4", "mandel_q", "g2", "g3", "g4")


def evaluate_witness(name: str, state: CollectiveState, args, cache: Optional[EtaCache]) -> dict:
    tol = args.tol
    if name == "Q":
        return {"name": "Q", "value": linear_entropy_Q(state)}
    if name == "xi_new":
        return xi_new(state, OptimizerConfig(seed=args.seed), cache, tol).to_dict()
    if name == "xi_spin":
        return xi_spin(state, tol).to_dict()
    if name == "mu_SR":
        return mu_SR(state, tol=tol).to_dict()
    if name == "mu_HZ":
        return mu_HZ(state, tol=tol).to_dict()
    if name == "mu_spin":
        return mu_spin(state, tol).to_dict()
    if name == "eq4":
        return single_mode_witness(state, args.eq4_variant, tol=tol).to_dict()
    if name == "mandel_q":
        return {"name": "mandel_q", "value": mandel_q_field(state)}
    if name in ("g2", "g3", "g4"):
        return {"name": name, "value": gn_wavefunction(state, ModePair(), int(name[1]))}
    raise ValueError(f"unknown witness {name!r}")


def run_witness(args, cache) -> int:
    try:
        with open(args.state_file) as fh:
            state = CollectiveState.from_json(fh.read())
    except (OSError, StateValidationError) as exc:
        print(f"error: {args.state_file}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    reports, partial = [], False
    for name in args.witness:
        try:
            rep = evaluate_witness(name, state, args, cache)
        except (ValueError, KeyError) as exc:
            rep = {"name": name, "verdict": INVALID, "error": str(exc)}
        if rep.get("verdict") in (INCONCLUSIVE, INVALID):
            partial = True
        reports.append(rep)
    out = {
        "config": {"state_file": os.path.basename(args.state_file), "witnesses": list(args.witness),
                   "tol": args.tol, "seed": args.seed, "eq4_variant": args.eq4_variant,
                   "phased": args.phased},
        "version": __version__,
        "state": {"space": state.to_json_dict()["space"], "kind": state.kind},
        "reports": reports,
    }
    text = json.dumps(out, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PARTIAL if partial else EXIT_OK


def _base_config(args, name, N, grid, **options) -> ExperimentConfig:
    return ExperimentConfig(experiment=name, N=N, grid=list(grid), seed=args.seed, tol=args.tol,
                            phased=args.phased, eq4_variant=args.eq4_variant,
                            lamb_shift=args.lamb_shift, full_scale=args.full_scale, options=options)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dicke-witness", description=__doc__.split("\n\n")[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--seed", type=int, default=0, help="seed for positions, random states and optimizer starts")
    ap.add_argument("--out-dir", default="results", help="output directory (default: results)")
    ap.add_argument("--tol", type=float, default=DETECTION_TOLERANCE, help="detection tolerance")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for grid points")
    ph = ap.add_mutually_exclusive_group()
    ph.add_argument("--phased", dest="phased", action="store_true", default=True,
                    help="timed-Dicke phased collective operators for superradiance (default)")
    ph.add_argument("--bare", dest="phased", action="store_false", help="unphased collective operators")
    ap.add_argument("--eq4-variant", choices=("central_moment", "as_printed"), default="central_moment")
    ap.add_argument("--lamb-shift", action="store_true", help="include the dispersive kernel part")
    ap.add_argument("--full-scale", action="store_true", help="fig6 with N=2000 (long run)")
    ap.add_argument("--eta-cache", default=None, help="bound cache file (default: <out-dir>/eta_cache.json)")
    ap.add_argument("--no-cache", action="store_true", help="do not read or write the bound cache")
    ap.add_argument("--svg", action="store_true", help="also write SVG line plots")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    default_g = parse_grid("0:3:31")
    f1 = sub.add_parser("fig1", help="Dicke-state ladder: Q and xi_new versus m")
    f1.add_argument("--N", type=int, default=16)
    for name, text in (("fig2", "order parameters, Q, xi_spin, xi_new of the Dicke ground state"),
                       ("fig3", "ensemble-field witnesses of the Dicke ground state"),
                       ("fig4", "atomic g^(n) and field photon statistics of the Dicke ground state")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--N", type=int, default=16)
        p.add_argument("--g-grid", type=parse_grid, default=default_g, help="g/g_c grid, start:stop:num or list")
    f5 = sub.add_parser("fig5", help="interacting condensate: xi_new and g2 versus interaction")
    f5.add_argument("--N", type=int, default=16)
    f5.add_argument("--omega-exc", type=float, default=1.0)
    f5.add_argument("--u-grid", type=parse_grid, default=parse_grid("0:2.5:51"),
                    help="U/(N omega_exc) grid")
    f6 = sub.add_parser("fig6", help="single-photon superradiance trajectory")
    f6.add_argument("--N", type=int, default=200)
    f6.add_argument("--radius", type=float, default=5.0, help="ball radius in wavelengths")
    f6.add_argument("--t-max", type=float, default=10.0, help="final time in 1/gamma")
    f6.add_argument("--t-points", type=int, default=41)
    rs = sub.add_parser("random-scan", help="Q versus xi_new on Haar-random pure states")
    rs.add_argument("--N", type=int, default=16)
    rs.add_argument("--count", type=int, default=2000)
    rs.add_argument("--kind", choices=("symmetric", "full"), default="symmetric")
    rs.add_argument("--allow-large", action="store_true", help="permit full-space states up to N=16")
    wt = sub.add_parser("witness", help="evaluate witnesses on a JSON state file")
    wt.add_argument("state_file")
    wt.add_argument("--witness", nargs="+", choices=WITNESSES, default=["Q", "xi_new"])
    wt.add_argument("--out", default=None, help="report path (default: stdout)")
    return ap


COMMANDS = {"fig1": run_fig1, "fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4, "fig5": run_fig5,
            "fig6": run_fig6, "random-scan": run_random_scan, "witness": run_witness}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cache = None
    if not args.no_cache:
        path = args.eta_cache
        if path is None and args.command != "witness":
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, "eta_cache.json")
        cache = EtaCache(path)
    try:
        status = COMMANDS[args.command](args, cache if cache is not None else EtaCache())
    except Exception as exc:  # noqa: BLE001 - report and map to the failure exit code
        log.error("%s failed: %s", args.command, exc, exc_info=args.verbose)
        return EXIT_FAILURE
    if cache is not None:
        cache.save()
    return status


if __name__ == "__main__":
    sys.exit(main())
