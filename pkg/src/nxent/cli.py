"""Command-line front end: ``nxent check|scan-alpha|bins|eta|minimize``.

Exit codes: 0 when every relation passes, 1 when any relation fails, 2 on
configuration or I/O errors (message on stderr, no report files written).
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .entropy import auto_grid
from .moments import check_tracing, fock_moments
from .probability import BinPartition, bin_probs, number_dist, parse_partition
from .relations import (
    DEFAULT_TOL,
    LN_2PI,
    check_binned_relations,
    check_renyi_relation,
    check_riesz,
    check_tsallis_relation,
    computed_eta,
    conjugate,
    minimize_entropy_sum,
)
from .states import State, load_state, parse_state, state_to_spec
from .transform import INV_SQRT_2PI, PhaseGrid, density, eta_estimate


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    state: Optional[State]
    n0: int = 0
    grid: object = "auto"
    alphas: list = field(default_factory=lambda: [2.0])
    partition: Optional[BinPartition] = None
    out: Path = Path("nxent-out")
    margin_tol: float = DEFAULT_TOL
    tracing_tol: float = 1e-4
    seed: int = 0
    eta_nmax: Optional[int] = None
    minimize: dict = field(default_factory=dict)

    def make_grid(self, orders) -> PhaseGrid:
        nmax = self.state.support
        if self.grid == "auto":
            return auto_grid(nmax, self.n0, orders)
        g = self.grid
        if "extent" in g:
            return PhaseGrid.square(float(g["extent"]), int(g.get("points", 512)))
        return PhaseGrid(float(g["xi_min"]), float(g["xi_max"]), float(g["k_min"]),
                         float(g["k_max"]), int(g.get("n_xi", 512)), int(g.get("n_k", 512)))


def _alpha_list(raw) -> list:
    alphas = []
    for a in raw:
        if isinstance(a, bool) or not isinstance(a, (int, float)):
            raise ConfigError(f"alpha values must be numbers, got {a!r}")
        if not a > 0.5:
            raise ConfigError(f"alpha = {a} is outside the conjugate domain alpha > 1/2")
        alphas.append(float(a))
    return alphas


def _scan_alphas(spec: dict) -> list:
    if "alpha_range" in spec:
        r = spec["alpha_range"]
        try:
            vals = np.linspace(float(r["start"]), float(r["stop"]), int(r["num"])).tolist()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("alpha_range needs start, stop and num") from exc
    else:
        vals = spec.get("alphas", [])
    vals = _alpha_list(vals)
    if len(vals) < 2:
        raise ConfigError("an alpha scan needs at least two points")
    if 1.0 not in vals:
        vals.append(1.0)
    return sorted(set(vals))


def load_config(path: Optional[str], command: str) -> tuple:
    if path is None:
        return RunConfig(state=None), {}
    p = Path(path)
    try:
        spec = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(spec, dict):
        raise ConfigError("config must be a JSON object")
    state = None
    if "state" in spec:
        st = spec["state"]
        state = load_state(p.parent / st) if isinstance(st, str) else parse_state(st)
    elif command != "eta" and command != "minimize":
        raise ConfigError("config needs a 'state' (file path or inline spec)")
    n0 = spec.get("n0", 0)
    if isinstance(n0, bool) or not isinstance(n0, int) or n0 < 0:
        raise ConfigError(f"n0 must be a non-negative integer, got {n0!r}")
    grid = spec.get("grid", "auto")
    if grid != "auto" and not (isinstance(grid, dict) and (
            "extent" in grid or {"xi_min", "xi_max", "k_min", "k_max"} <= set(grid))):
        raise ConfigError("grid must be 'auto', {extent, points} or explicit bounds")
    tol = spec.get("tolerances", {})
    cfg = RunConfig(
        state=state,
        n0=n0,
        grid=grid,
        alphas=_alpha_list(spec.get("alphas", [2.0])) if command != "scan-alpha" else [],
        partition=parse_partition(spec["partition"]) if "partition" in spec else None,
        out=Path(spec.get("out", "nxent-out")),
        margin_tol=float(tol.get("margin", DEFAULT_TOL)),
        tracing_tol=float(tol.get("tracing", 1e-4)),
        seed=int(spec.get("seed", 0)),
        eta_nmax=spec.get("eta", {}).get("nmax"),
        minimize=dict(spec.get("minimize", {})),
    )
    return cfg, spec


# --- output ------------------------------------------------------------------


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _density_text(w) -> str:
    buf = io.StringIO()
    w.to_csv(buf)
    return buf.getvalue()


def write_outputs(out: Path, files: dict) -> None:
    """Write every file to a temporary name first, then rename them all."""
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
            staged.append((tmp, out / name))
        for tmp, final in staged:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in staged:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(tmp)
        raise


# --- commands ----------------------------------------------------------------


def _orders(alphas):
    out = []
    for a in alphas:
        pair = conjugate(a)
        out += [pair.alpha, pair.beta]
    return out


def cmd_check(cfg: RunConfig) -> tuple:
    state = cfg.state
    grid = cfg.make_grid(_orders(cfg.alphas))
    w = density(state, cfg.n0, grid)
    s = number_dist(state)
    reports = []
    for a in cfg.alphas:
        reports += check_renyi_relation(state, cfg.n0, a, w=w, s=s, tol=cfg.margin_tol)
        reports += check_tsallis_relation(state, cfg.n0, a, w=w, s=s, tol=cfg.margin_tol)
        pair = conjugate(a)
        if pair.alpha != pair.beta:
            reports += check_riesz(w, s, pair, tol=cfg.margin_tol)
    reports.append(check_tracing(state, cfg.n0, w=w, tol=cfg.tracing_tol))
    ok = all(r.passed for r in reports)
    payload = {
        "command": "check",
        "n0": cfg.n0,
        "grid": grid.to_dict(),
        "normalization": w.total(),
        "eta": computed_eta(cfg.n0, w.nmax),
        "eta_universal": INV_SQRT_2PI,
        "moments": fock_moments(state).to_dict(),
        "reports": [r.to_dict() for r in reports],
        "all_pass": ok,
    }
    files = {
        "report.json": _json_text(payload),
        "density.csv": _density_text(w),
        "number_dist.csv": _csv_text(["n", "s"], enumerate(s.probs)),
    }
    return ok, files


def cmd_scan_alpha(cfg: RunConfig, alphas) -> tuple:
    state = cfg.state
    grid = cfg.make_grid(_orders(alphas))
    w = density(state, cfg.n0, grid)
    s = number_dist(state)
    rows, reports = [], []
    for a in alphas:
        r = check_renyi_relation(state, cfg.n0, a, w=w, s=s, assignment="w", tol=cfg.margin_tol)[0]
        t = check_tsallis_relation(state, cfg.n0, a, w=w, s=s, assignment="w", tol=cfg.margin_tol)[0]
        reports += [r, t]
        rows.append((a, r.beta, r.lhs, r.bound, t.lhs, t.bound, r.margin, t.margin))
    ok = all(r.passed for r in reports)
    header = ["alpha", "beta", "renyi_lhs", "renyi_bound", "tsallis_lhs", "tsallis_bound",
              "margin_r", "margin_t"]
    files = {
        "scan.csv": _csv_text(header, rows),
        "report.json": _json_text({"command": "scan-alpha", "n0": cfg.n0, "grid": grid.to_dict(),
                                   "reports": [r.to_dict() for r in reports], "all_pass": ok}),
    }
    return ok, files


def cmd_bins(cfg: RunConfig) -> tuple:
    if cfg.partition is None:
        raise ConfigError("the bins command needs a 'partition' in the config")
    state = cfg.state
    grid = cfg.make_grid(_orders(cfg.alphas))
    w = density(state, cfg.n0, grid)
    s = number_dist(state)
    binned = bin_probs(w, cfg.partition)
    reports = []
    for a in cfg.alphas:
        reports += check_binned_relations(state, cfg.n0, a, cfg.partition, w=w, s=s,
                                          tol=cfg.margin_tol)
    xe, ke = cfg.partition.xi_edges, cfg.partition.k_edges
    rows = [(xe[l], xe[l + 1], ke[m], ke[m + 1], binned.r[l, m])
            for l in range(xe.size - 1) for m in range(ke.size - 1)]
    if binned.catch_all:
        rows.append(("nan", "nan", "nan", "nan", binned.dist.probs[-1]))
    ok = all(r.passed for r in reports)
    files = {
        "bins.csv": _csv_text(["xi_lo", "xi_hi", "k_lo", "k_hi", "r"], rows),
        "report.json": _json_text({
            "command": "bins", "n0": cfg.n0, "grid": grid.to_dict(),
            "dxi": binned.dxi, "dk": binned.dk, "trivial": binned.dxi * binned.dk >= 2 * math.pi,
            "catch_all": binned.catch_all, "residual": binned.residual,
            "reports": [r.to_dict() for r in reports], "all_pass": ok,
        }),
    }
    return ok, files


def cmd_eta(n0: int, nmax: int) -> tuple:
    if nmax < 0 or n0 < 0:
        raise ConfigError("n0 and nmax must be non-negative")
    est = eta_estimate(n0, nmax)
    payload = {"command": "eta", "n0": n0, "nmax": nmax, **est.to_dict()}
    return True, {"eta.json": _json_text(payload)}, payload


def cmd_minimize(cfg: RunConfig) -> tuple:
    opts = cfg.minimize
    alpha = float(opts.get("alpha", cfg.alphas[0] if cfg.alphas else 2.0))
    _alpha_list([alpha])
    N = int(opts.get("N", cfg.state.N if cfg.state is not None else 4))
    state, report = minimize_entropy_sum(
        alpha, cfg.n0, N, cfg.seed, starts=int(opts.get("starts", 3)),
        max_evals=int(opts.get("max_evals", 4000)),
        search_points=int(opts.get("search_points", 128)), tol=cfg.margin_tol,
    )
    files = {
        "best_state.json": _json_text(state_to_spec(state)),
        "report.json": _json_text({"command": "minimize", "n0": cfg.n0, "N": N,
                                   "seed": cfg.seed, "reports": [report.to_dict()],
                                   "all_pass": report.passed}),
    }
    return report.passed, files


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nxent", description="Number-annihilation entropic uncertainty checks."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("check", "check the continuous relations, norm inequalities and tracing identities"),
        ("scan-alpha", "sweep the Renyi and Tsallis relations over alpha"),
        ("bins", "binned relations for a rectangular partition"),
        ("eta", "estimate the supremum eta of the transformed basis"),
        ("minimize", "search for states close to the Renyi bound"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=name not in ("eta",), help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        if name == "eta":
            p.add_argument("--n0", type=int, default=None)
            p.add_argument("--nmax", type=int, default=None)
    return parser


def _threads() -> int:
    raw = os.environ.get("NXENT_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        raise ConfigError(f"NXENT_THREADS must be an integer, got {raw!r}") from None


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = _threads()
        cfg, spec = load_config(args.config, args.command)
        if args.out:
            cfg.out = Path(args.out)
        if args.seed is not None:
            cfg.seed = args.seed
        limiter = contextlib.nullcontext()
        if threads:
            from threadpoolctl import threadpool_limits

            limiter = threadpool_limits(limits=threads)
        with limiter:
            if args.command == "check":
                ok, files = cmd_check(cfg)
            elif args.command == "scan-alpha":
                ok, files = cmd_scan_alpha(cfg, _scan_alphas(spec))
            elif args.command == "bins":
                ok, files = cmd_bins(cfg)
            elif args.command == "eta":
                eta_spec = spec.get("eta", {})
                n0 = args.n0 if args.n0 is not None else int(eta_spec.get("n0", cfg.n0))
                nmax = args.nmax if args.nmax is not None else eta_spec.get("nmax")
                if nmax is None:
                    nmax = cfg.state.N if cfg.state is not None else 30
                ok, files, payload = cmd_eta(n0, int(nmax))
                print(f"eta = {payload['eta']:.17g} at n={payload['n']}, "
                      f"xi={payload['xi']:.6g}, k={payload['k']:.6g}; "
                      f"bound (2 pi)^(-1/2) = {payload['bound']:.17g}")
            else:
                ok, files = cmd_minimize(cfg)
            write_outputs(cfg.out, files)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"nxent: error: {exc}", file=sys.stderr)
        return 2
    if not ok:
        print("nxent: one or more relations failed; see report.json", file=sys.stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
