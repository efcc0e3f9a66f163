"""Command-line front end: ``dumbbell-nls <command> ...``.

Commands: spectrum, solve, branch, compare, normalform, elliptic-check.

Exit codes: 0 success, 1 property failure, 2 root-finder failure,
3 solver failure or truncated branch, 64 usage error, 65 malformed input,
66 missing input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .closedform import (mirrored, ring_profile, sech_profile,
                         segment_profile, solve_k0)
from .elliptic import property_suite
from .errors import (BracketingFailure, GridMismatch, NoRoot, NonCommensurateGrid, SolverFailure)
from .grid import EDGES, DumbbellGrid, GraphFunction, make_grid, nearest_commensurate_N
from .normalform import pitchfork_report
from .solve import (BranchTable, StationaryState, constant_branch, constant_seed, continue_branch,
                    edge_charge, gaussian_seed, make_state, solve)
from .spectrum import spectrum_report

log = logging.getLogger("dumbbell_nls")

EXIT_OK, EXIT_PROPERTY, EXIT_ROOT, EXIT_SOLVER = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66
FORMAT_VERSION = 1
CONFIG_KEYS = {"N": int, "tol": float, "newton_tol": float, "switch_tol": float,
               "max_iter": int, "steps": int, "method": str}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def fmt(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------------------
# solution files
# ---------------------------------------------------------------------------
def solution_payload(state: StationaryState, tag: str | None = None) -> dict:
    g, phi = state.grid, state.phi
    return {
        "format_version": FORMAT_VERSION,
        "L": fmt(g.L), "N": g.N, "M": g.M,
        "lambda": fmt(state.lam), "Q": fmt(state.Q), "E": fmt(state.E),
        "residual_norm": fmt(state.residual_norm), "tag": tag or state.tag,
        "values": {e: [fmt(v) for v in phi.edge_values(e)] for e in EDGES},
    }


def dumps_solution(state: StationaryState, tag: str | None = None) -> str:
    return json.dumps(solution_payload(state, tag), indent=1) + "\n"


def write_solution(path, state: StationaryState, tag: str | None = None) -> None:
    Path(path).write_text(dumps_solution(state, tag))


def read_solution(path) -> tuple[DumbbellGrid, float, GraphFunction, dict]:
    """Parse a solution file.  Raises FileNotFoundError or DataError."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        if data.get("format_version") != FORMAT_VERSION:
            raise DataError(f"unsupported format_version {data.get('format_version')!r}")
        L, N, lam = float(data["L"]), int(data["N"]), float(data["lambda"])
        grid = make_grid(L, N)
        if int(data["M"]) != grid.M:
            raise DataError(f"M={data['M']} inconsistent with L={L!r}, N={N}")
        edges = [np.array([float(v) for v in data["values"][e]]) for e in EDGES]
        phi = GraphFunction.from_edges(grid, *edges)
    except DataError:
        raise
    except (KeyError, TypeError, ValueError, GridMismatch, NonCommensurateGrid) as exc:
        raise DataError(f"malformed solution file {path}: {exc}") from exc
    return grid, lam, phi, data


def interpolate_onto(phi: GraphFunction, grid: DumbbellGrid) -> GraphFunction:
    """Per-edge linear interpolation of ``phi`` onto another mesh of the same dumbbell."""
    src = phi.grid
    if abs(src.L - grid.L) > 1e-12:
        raise DataError(f"initial profile is for L={src.L!r}, requested L={grid.L!r}")
    if (src.N, src.M) == (grid.N, grid.M):
        return phi.copy()
    pieces = []
    for e in EDGES:
        n_src = src.M if e == "segment" else src.N
        n_dst = grid.M if e == "segment" else grid.N
        pieces.append(np.interp(np.linspace(0, 1, n_dst + 1), np.linspace(0, 1, n_src + 1),
                                phi.edge_values(e)))
    # the junction copies of the rings must coincide with the segment endpoints exactly
    pieces[0][[0, -1]] = pieces[1][0]
    pieces[2][[0, -1]] = pieces[1][-1]
    return GraphFunction.from_edges(grid, *pieces)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------
def load_config(path) -> dict:
    """key=value lines; '#' starts a comment.  Unknown keys are a data error."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise DataError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return out


def worker_count(requested: int) -> int:
    cap = os.environ.get("DUMBBELL_NLS_THREADS")
    try:
        cap_n = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        raise UsageError(f"DUMBBELL_NLS_THREADS must be an integer, got {cap!r}")
    return max(1, min(requested, cap_n))


def _grid(L: float, N: int) -> DumbbellGrid:
    if not L > 0:
        raise UsageError(f"--L must be positive, got {L!r}")
    try:
        return make_grid(L, N)
    except NonCommensurateGrid as exc:
        hint = nearest_commensurate_N(L, N)
        msg = str(exc) + (f"; try --N {hint}" if hint else "; L must be a rational multiple of pi")
        raise UsageError(msg) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_spectrum(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    if not args.L > 0:
        raise UsageError("--L must be positive")
    try:
        # orderings need two roots of each kind
        rep = spectrum_report(args.L, max(args.count, 2))
    except BracketingFailure as exc:
        print(f"root finding failed: {exc}", file=sys.stderr)
        return EXIT_ROOT
    res = rep.resonance
    payload = {
        "L": fmt(rep.L),
        "doubles": [fmt(v) for v in rep.doubles],
        "even_roots": [fmt(v) for v in rep.even_roots[:args.count]],
        "odd_roots": [fmt(v) for v in rep.odd_roots[:args.count]],
        "residuals": {k: [fmt(v) for v in vals[:args.count]] for k, vals in rep.residuals.items()},
        "resonant": rep.resonant,
        "resonance": None if res is None else {"m": res.m, "n": res.n, "kind": res.kind},
        "orderings_hold": rep.orderings_hold(),
        "eigenvalues": [fmt(v) for v in rep.eigenvalues(args.count)],
    }
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return EXIT_OK


def _initial_profile(choice: str, grid: DumbbellGrid, lam: float) -> GraphFunction:
    if choice == "constant":
        return constant_seed(grid, lam)
    if choice == "segment-gauss":
        return gaussian_seed(grid, lam, "segment")
    if choice == "ring-gauss":
        return gaussian_seed(grid, lam, "ring")
    if choice.startswith("file:"):
        path = choice[5:]
        if not Path(path).is_file():
            raise FileNotFoundError(path)
        _, _, phi, _ = read_solution(path)
        return interpolate_onto(phi, grid)
    raise UsageError(f"unknown --init {choice!r}")


def cmd_solve(args) -> int:
    if not args.lam < 0:
        raise UsageError("--lambda must be negative")
    grid = _grid(args.L, args.N)
    seed = _initial_profile(args.init, grid, args.lam)
    kw = {}
    if args.method == "newton":
        kw = {"tol": args.newton_tol}
    elif args.method == "petviashvili":
        kw = {"tol": args.tol, "max_iter": args.max_iter}
    else:
        kw = {"tol": args.newton_tol, "switch_tol": args.switch_tol}
    try:
        st = solve(seed, args.lam, args.method, **kw)
    except SolverFailure as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        if args.out and exc.state is not None:
            partial = make_state(exc.state, args.lam, method=args.method, spectra=False)
            write_solution(str(args.out) + ".failed", partial, tag="failed")
        return EXIT_SOLVER
    if args.out:
        write_solution(args.out, st)
    print(f"lambda={fmt(st.lam)} Q={fmt(st.Q)} E={fmt(st.E)} "
          f"residual={st.residual_norm:.3e} tag={st.tag}")
    return EXIT_OK


def branch_table(grid: DumbbellGrid, family: str, start: float, end: float, steps: int,
                 tol: float = 1e-12) -> BranchTable:
    """Seed a family at ``start`` per the CLI seeding rule and continue it to ``end``."""
    if family == "constant":
        return constant_branch(grid, start, end, steps)
    center = "ring" if family == "asymmetric" else "segment"
    seed = solve(gaussian_seed(grid, start, center), start, "hybrid", tol=tol)
    if seed.tag != family:
        raise SolverFailure(f"{family} seed at lambda={start!r} converged to a {seed.tag} state")
    return continue_branch(seed, end, steps, family=family, tol=tol)


def branch_csv(table: BranchTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BranchTable.COLUMNS)
    for row in table.rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _branch_path(out: str | None, family: str, many: bool) -> Path | None:
    if out is None:
        return None
    p = Path(out)
    return p.with_name(f"{p.stem}_{family}{p.suffix or '.csv'}") if many else p


def cmd_branch(args) -> int:
    families = [f.strip() for f in args.family.split(",") if f.strip()]
    bad = [f for f in families if f not in ("constant", "asymmetric", "symmetric")]
    if not families or bad:
        raise UsageError(f"unknown family {bad or args.family!r}")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not (args.lambda_start < 0 and args.lambda_end < 0):
        raise UsageError("lambda values must be negative")
    grid = _grid(args.L, args.N)

    def run(fam):
        return fam, branch_table(grid, fam, args.lambda_start, args.lambda_end, args.steps,
                                 tol=args.newton_tol)

    status = EXIT_OK
    with ThreadPoolExecutor(max_workers=worker_count(len(families))) as pool:
        futures = [pool.submit(run, f) for f in families]
        for fut in futures:
            try:
                fam, table = fut.result()
            except SolverFailure as exc:
                print(f"solver failed: {exc}", file=sys.stderr)
                status = EXIT_SOLVER
                continue
            path = _branch_path(args.out, fam, len(families) > 1)
            text = branch_csv(table)
            if path is None:
                sys.stdout.write(text)
            else:
                path.write_text(text)
                meta = dict(table.metadata)
                meta["rows"] = len(table.rows)
                meta["created"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
                meta["version"] = __version__
                Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=1) + "\n")
            if table.truncated:
                print(f"{fam} branch ended at lambda={fmt(table.end)} after {len(table.rows)} rows",
                      file=sys.stderr)
                status = EXIT_SOLVER
    return status


def reference_profile(kind: str, grid: DumbbellGrid, lam: float, phi: GraphFunction) -> GraphFunction:
    """Closed form named by ``kind`` on ``grid``; ring forms go on the heavier ring of ``phi``."""
    mu = math.sqrt(-lam)
    left_heavy = edge_charge(phi, "ring_minus") > edge_charge(phi, "ring_plus")
    if kind == "sech-segment":
        return sech_profile(lam, grid.L, "segment").on_grid(grid)
    if kind == "sech-ring":
        prof = sech_profile(lam, grid.L, "ring")
    elif kind == "dnoidal":
        prof = ring_profile(solve_k0(mu, grid.L, "ring"))
    elif kind == "cnoidal":
        return segment_profile(solve_k0(mu, grid.L, "segment")).on_grid(grid)
    else:
        raise UsageError(f"unknown profile {kind!r}")
    return (mirrored(prof) if left_heavy else prof).on_grid(grid)


def cmd_compare(args) -> int:
    path = Path(args.solution)
    if not path.is_file():
        print(f"no such file: {path}", file=sys.stderr)
        return EXIT_NOINPUT
    grid, lam, phi, _ = read_solution(path)
    if not lam < 0:
        raise DataError("solution file has lambda >= 0")
    try:
        ref = reference_profile(args.profile, grid, lam, phi)
    except NoRoot as exc:
        print(f"closed form unavailable: {exc}", file=sys.stderr)
        return EXIT_ROOT
    diff = phi.values - ref.values
    sup = float(np.max(np.abs(diff)))
    l2 = math.sqrt(float(np.sum(grid.weights() * diff * diff)))
    print(f"profile={args.profile} lambda={fmt(lam)} sup_distance={sup:.6e} l2_distance={l2:.6e} "
          f"relative_sup={sup / math.sqrt(-lam):.6e}")
    return EXIT_OK


def cmd_normalform(args) -> int:
    if not args.L > 0:
        raise UsageError("--L must be positive")
    try:
        rep = pitchfork_report(args.L)
    except BracketingFailure as exc:
        print(f"root finding failed: {exc}", file=sys.stderr)
        return EXIT_ROOT
    lines = []
    for key, val in rep.as_dict().items():
        sign = "negative" if val < 0 else "positive" if val > 0 else "zero"
        lines.append(f"{key:10s} = {fmt(val):>24s}  {sign}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_elliptic_check(args) -> int:
    failed = 0
    for name, value, bound, ok in property_suite():
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:42s} measured={value:.3e} bound={bound:.3e}")
    return EXIT_PROPERTY if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    d = {"N": 128, "tol": 1e-14, "newton_tol": 1e-12, "switch_tol": 1e-10, "max_iter": 5000,
         "steps": 20, "method": "hybrid"}
    d.update(defaults or {})
    p = _Parser(prog="dumbbell-nls", description="Standing waves of the cubic NLS on a dumbbell graph.")
    p.add_argument("--config", help="key=value defaults file (flags override)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", help="analytic spectrum of the Laplacian")
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--count", type=int, default=4)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("solve", help="compute one standing wave")
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--init", default="segment-gauss",
                   help="constant | segment-gauss | ring-gauss | file:PATH")
    s.add_argument("--method", choices=("petviashvili", "newton", "hybrid"), default=d["method"])
    s.add_argument("--N", type=int, default=d["N"])
    s.add_argument("--tol", type=float, default=d["tol"])
    s.add_argument("--newton-tol", type=float, default=d["newton_tol"])
    s.add_argument("--switch-tol", type=float, default=d["switch_tol"])
    s.add_argument("--max-iter", type=int, default=d["max_iter"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("branch", help="continue a solution family in lambda")
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--family", required=True, help="constant, asymmetric, symmetric or a comma list")
    s.add_argument("--lambda-start", type=float, required=True)
    s.add_argument("--lambda-end", type=float, required=True)
    s.add_argument("--steps", type=int, default=d["steps"])
    s.add_argument("--N", type=int, default=d["N"])
    s.add_argument("--newton-tol", type=float, default=d["newton_tol"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_branch)

    s = sub.add_parser("compare", help="distance between a stored solution and a closed form")
    s.add_argument("--solution", required=True)
    s.add_argument("--profile", required=True, choices=("sech-segment", "sech-ring", "dnoidal", "cnoidal"))
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("normalform", help="pitchfork thresholds and normal-form coefficients")
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_normalform)

    s = sub.add_parser("elliptic-check", help="run the elliptic-function property suite")
    s.set_defaults(func=cmd_elliptic_check)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        defaults = {}
        if known.config:
            if not Path(known.config).is_file():
                print(f"no such config file: {known.config}", file=sys.stderr)
                return EXIT_NOINPUT
            defaults = load_config(known.config)
        args = build_parser(defaults).parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"no such input: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except NoRoot as exc:
        print(f"root finding failed: {exc}", file=sys.stderr)
        return EXIT_ROOT


if __name__ == "__main__":
    sys.exit(main())
