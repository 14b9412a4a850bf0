"""Command-line front end.

    mbswitness fig2 --r-min 0 --r-max 2 --steps 201 --out fig2.csv
    mbswitness witness state.json --subspace nonvacuum
    mbswitness oracle --kind polarization --r 0.5 --n-max 8 --restarts 32
    mbswitness noise-sweep --parameter visibility --r 0.5 --points 21
    mbswitness observables state.json
    mbswitness export mbs --r 0.5 --out state.json

Scientific verdicts always exit 0. Operational errors use exit 2 (bad
input), 3 (state has no weight in the subspace) and 4 (an oracle beat its
bound, which indicates a bug).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channels import noisy_report
from .fock import EmptySubspaceError, PureState, dump_state, load_state, mean_photon_number, MODES
from .oracles import (
    convex_probe,
    oracle_number_sup,
    oracle_polarization_sup,
    random_ansatz,
    sector_product_max,
    verify_appendix_chain,
)
from .states import blind_mixture, estimate_squeezing, exemplar_state, mbs_singlet, sector_singlet, tmsv
from .stokes import AXES, stokes_variance, stokes_vector, total_spin_squared
from .subspace import Subspace
from .witness import argmax_sector, bound_number, bound_polarization, evaluate_witness

log = logging.getLogger("mbswitness")

COLUMNS = (
    "r",
    "bound_number",
    "bound_polarization",
    "threshold",
    "argmax_sector",
    "fidelity",
    "witness_value",
    "conditioning_probability",
    "tail_weight",
)

EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_UNSOUND = 4


@dataclass
class RunConfig:
    command: str
    n_max: int = 10
    subspace: str = "nonvacuum"
    seed: int = 0
    restarts: int = 32
    prune: float = 1e-10
    tol: float = 1e-14
    out: str | None = None
    format: str = "csv"
    jobs: int = 1


class InputError(Exception):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".12g")


def render_csv(config: RunConfig, rows: list[dict], columns=COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(f"# mbswitness {__version__}\n")
    buf.write(f"# command: {config.command}\n")
    buf.write(f"# config: {json.dumps(asdict(config), sort_keys=True)}\n")
    buf.write(f"# columns: {','.join(columns)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(config: RunConfig, payload) -> str:
    """JSON output with the version and run config embedded; lists go under "rows"."""
    header = {"mbswitness": __version__, "command": config.command, "config": asdict(config)}
    body = {"rows": payload} if isinstance(payload, list) else payload
    return json.dumps({**body, **header}, sort_keys=True, indent=1)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _read_state(path: str):
    try:
        return load_state(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read state file {path!r}: {exc}") from None


def _subspace(text: str) -> Subspace:
    try:
        sub = Subspace.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if sub.is_empty:
        raise InputError("subspace is empty")
    return sub


def _parallel_map(fn, args, jobs: int) -> list:
    if jobs <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args)))


# -- fig2 -----------------------------------------------------------------------


def fig2_row(r: float, subspace: str) -> dict:
    b_num = bound_number(r, subspace)
    b_pol = bound_polarization(r, subspace)
    return {
        "r": r,
        "bound_number": b_num,
        "bound_polarization": b_pol,
        "threshold": max(b_num, b_pol),
        "argmax_sector": argmax_sector(r, subspace),
    }


def fig2_rows(r_min: float, r_max: float, steps: int, subspace: str = "nonvacuum", jobs: int = 1) -> list[dict]:
    if not (0 <= r_min < r_max) or steps < 2:
        raise InputError("need 0 <= r_min < r_max and steps >= 2")
    grid = [float(r) for r in np.linspace(r_min, r_max, steps)]
    return _parallel_map(fig2_row, [(r, subspace) for r in grid], jobs)


def cmd_fig2(args, config: RunConfig) -> int:
    sub = _subspace(args.subspace)
    rows = fig2_rows(args.r_min, args.r_max, args.steps, sub.label(), args.jobs)
    if args.format == "json":
        _emit(render_json(config, rows), args.out)
    else:
        _emit(render_csv(config, rows), args.out)
    return 0


# -- witness --------------------------------------------------------------------


def estimate_state_squeezing(state) -> float:
    """Squeezing from the mean photon number averaged over the four modes."""
    nbar = sum(mean_photon_number(state, m) for m in MODES) / 4
    return estimate_squeezing(nbar, n_max=state.n_max)


def cmd_witness(args, config: RunConfig) -> int:
    sub = _subspace(args.subspace)
    state = _read_state(args.state_file)
    if args.r is None:
        try:
            r = estimate_state_squeezing(state)
        except ValueError as exc:
            raise InputError(f"cannot estimate squeezing: {exc}") from None
        log.info("estimated squeezing r = %.6f", r)
    else:
        r = args.r
    report = evaluate_witness(state, r, sub)
    if args.format == "csv":
        row = {k: getattr(report, k) for k in COLUMNS if k != "argmax_sector"}
        row["argmax_sector"] = argmax_sector(r, sub)
        _emit(render_csv(config, [row]), args.out)
    else:
        _emit(render_json(config, report.to_dict()), args.out)
    return 0


# -- oracle ---------------------------------------------------------------------


def run_chain(r: float, subspace: Subspace, n_max: int, samples: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    sectors = subspace.upto(n_max)
    violations = 0
    first = None
    for _ in range(samples):
        k = int(rng.integers(1, len(sectors) + 1))
        chosen = sorted(rng.choice(sectors, size=k, replace=False).tolist())
        report = verify_appendix_chain(random_ansatz(chosen, rng), r, subspace, n_max)
        if not report.holds:
            violations += 1
            first = first or asdict(report.first_violation)
    return {"kind": "chain", "r": r, "samples": samples, "violations": violations, "first_violation": first}


def cmd_oracle(args, config: RunConfig) -> int:
    sub = _subspace(args.subspace)
    if args.kind == "chain":
        result = run_chain(args.r, sub, args.n_max, args.samples, args.seed)
        _emit(render_json(config, result), args.out)
        return EXIT_UNSOUND if result["violations"] else 0
    if args.kind == "number":
        result = oracle_number_sup(args.r, sub, args.n_max)
    elif args.kind == "polarization":
        result = oracle_polarization_sup(args.r, sub, args.n_max, args.restarts, args.seed, args.tol)
    elif args.kind == "convex":
        result = convex_probe(args.r, sub, args.n_max, args.points, args.restarts, args.seed)
    else:
        result = sector_product_max(args.sector, args.restarts, args.seed, tol=args.tol)
    payload = {"kind": args.kind, **result.to_dict()}
    _emit(render_json(config, payload), args.out)
    print(f"achieved={result.achieved:.12g} bound={result.bound:.12g} gap={result.gap:.3e}", file=sys.stderr)
    return 0 if result.sound else EXIT_UNSOUND


# -- noise sweep ----------------------------------------------------------------


def noise_row(parameter: str, value: float, r: float, subspace: str, n_max: int, prune: float) -> dict:
    row = {"noise": value, "r": r}
    try:
        rep = noisy_report(parameter, value, r, subspace, n_max, prune)
    except EmptySubspaceError:
        row.update(bound_number=bound_number(r, subspace), bound_polarization=bound_polarization(r, subspace))
        row["threshold"] = max(row["bound_number"], row["bound_polarization"])
        row["argmax_sector"] = argmax_sector(r, subspace)
        return row
    row.update({k: getattr(rep, k) for k in COLUMNS if k not in ("r", "argmax_sector")})
    row["argmax_sector"] = argmax_sector(r, subspace)
    return row


def cmd_noise_sweep(args, config: RunConfig) -> int:
    sub = _subspace(args.subspace)
    lo = args.min if args.min is not None else (0.05 if args.parameter == "loss" else 0.0)
    if not (0 <= lo < args.max <= 1) or args.points < 2:
        raise InputError("need 0 <= min < max <= 1 and points >= 2")
    grid = [float(v) for v in np.linspace(lo, args.max, args.points)]
    rows = _parallel_map(
        noise_row, [(args.parameter, v, args.r, sub.label(), args.n_max, args.prune) for v in grid], args.jobs
    )
    columns = COLUMNS + ("noise",)
    if args.format == "json":
        _emit(render_json(config, rows), args.out)
    else:
        _emit(render_csv(config, rows, columns), args.out)
    return 0


# -- observables ----------------------------------------------------------------


def cmd_observables(args, config: RunConfig) -> int:
    state = _read_state(args.state_file)
    vec = stokes_vector(state, args.party)
    record = {
        "party": args.party,
        "sx": vec.sx,
        "sy": vec.sy,
        "sz": vec.sz,
        "s2": total_spin_squared(state),
        "variances": {a: stokes_variance(state, a, args.party) for a in AXES},
    }
    _emit(render_json(config, record), args.out)
    return 0


# -- export ---------------------------------------------------------------------


def _parse_weights(text: str) -> dict[int, float]:
    try:
        pairs = [item.split(":") for item in text.split(",") if item.strip()]
        return {int(n): float(w) for n, w in pairs}
    except ValueError:
        raise InputError(f"bad weights {text!r}; expected 'N:w,N:w'") from None


def cmd_export(args, config: RunConfig) -> int:
    n_max = args.n_max
    try:
        if args.kind == "mbs":
            state = mbs_singlet(args.r, n_max)
        elif args.kind == "tmsv":
            state = tmsv(args.r, ("AH", "BV"), 1, n_max)
        elif args.kind == "singlet":
            state = sector_singlet(args.sector, n_max)
        elif args.kind == "blind":
            state = blind_mixture(_parse_weights(args.weights), n_max)
        else:
            state = exemplar_state(args.kind.replace("-", "_"), args.alpha, args.beta, n_max)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(dump_state(state), args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, fmt: str = "csv") -> None:
    p.add_argument("--n-max", type=int, default=10, help="per-mode photon cutoff (default 10)")
    p.add_argument("--subspace", default="nonvacuum", help='"full", "nonvacuum" or a list like "1-4,6"')
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--restarts", type=int, default=32, help="optimizer restarts (default 32)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--prune", type=float, default=1e-10, help="loss-branch prune weight (default 1e-10)")
    p.add_argument("--tol", type=float, default=1e-14, help="optimizer convergence residual (default 1e-14)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbswitness", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig2", help="separability bounds versus squeezing")
    _common(p)
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=201)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("witness", help="evaluate the witness on a state file")
    _common(p, fmt="json")
    p.add_argument("state_file")
    p.add_argument("--r", type=float, default=None, help="reference squeezing (estimated if absent)")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle", help="brute-force checks of the bounds")
    _common(p, fmt="json")
    p.add_argument("--kind", choices=("number", "polarization", "convex", "sector", "chain"), required=True)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--sector", type=int, default=1, help="sector N for --kind sector")
    p.add_argument("--samples", type=int, default=200, help="random ansatz count for --kind chain")
    p.add_argument("--points", type=int, default=21, help="mixing grid size for --kind convex")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("noise-sweep", help="witness of a noisy MBS over a noise grid")
    _common(p)
    p.add_argument("--parameter", choices=("loss", "visibility", "dephase"), required=True)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=1.0)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("observables", help="Stokes expectation values of a state file")
    _common(p, fmt="json")
    p.add_argument("state_file")
    p.add_argument("--party", choices=("alice", "bob", "total"), default="total")
    p.set_defaults(func=cmd_observables)

    p = sub.add_parser("export", help="write a constructed state as JSON")
    _common(p, fmt="json")
    p.add_argument("kind", choices=("mbs", "tmsv", "singlet", "blind", "cross-layer", "beam-splitter"))
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--sector", type=int, default=1)
    p.add_argument("--weights", default="1:1")
    p.add_argument("--alpha", type=float, default=2**-0.5)
    p.add_argument("--beta", type=float, default=2**-0.5)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    config = RunConfig(
        command=args.command,
        n_max=args.n_max,
        subspace=args.subspace,
        seed=args.seed,
        restarts=args.restarts,
        prune=args.prune,
        tol=args.tol,
        out=args.out,
        format=args.format,
        jobs=args.jobs,
    )
    try:
        return args.func(args, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmptySubspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
