"""Command line: ``zero-regrets <command> ...``.

Exit codes: 0 when a run ends with PNE_FOUND or NO_PNE, 2 on TIME_LIMIT,
1 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import bruteforce, instances
from .bench import batch, write_batch_csv
from .errors import InputError, ZeroRegretsError
from .master import CSV_COLUMNS, ENUMERATE, EPSILON_ABS, EPSILON_REL, MODES, SELECT, TIME_LIMIT, SolveConfig, run
from .models import cfld, kpg, nfg, qipg

log = logging.getLogger("zero_regrets")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _solver_flags(p: argparse.ArgumentParser, mode: bool = True) -> None:
    if mode:
        p.add_argument("--mode", choices=MODES, default=SELECT)
    p.add_argument("--time-limit", type=float, default=1800.0)
    p.add_argument("--epsilon", type=_fraction, default=None, help="absolute epsilon")
    p.add_argument("--epsilon-rel", type=_fraction, default=None, help="relative epsilon")
    p.add_argument("--limit", type=int, default=None, help="stop enumerating after this many PNEs")
    p.add_argument("--strategic-cuts", choices=("on", "off"), default="on")
    p.add_argument("--cut-batch", choices=("all", "one"), default="all")
    p.add_argument("--jobs", type=int, default=1, help="parallel best responses (batch: parallel instances)")
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry with gen; solving is deterministic")
    p.add_argument("--out", default=None, help="report JSON path; a CSV row goes next to it")
    p.add_argument("--dump-lp", default=None, help="write the initial master model in LP format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zero-regrets", description="Pure Nash equilibria of integer programming games")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gsub = gen.add_subparsers(dest="family", required=True)
    g = gsub.add_parser("kpg")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--m", type=int, default=25)
    g.add_argument("--dist", choices=kpg.DISTRIBUTIONS, default="A")
    g.add_argument("--capacity", default="0.5")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g = gsub.add_parser("nfg")
    g.add_argument("--vertices", type=int, default=50)
    g.add_argument("--players", type=int, default=3)
    g.add_argument("--weights", type=_fraction, nargs="*", default=None)
    g.add_argument("--endpoints", choices=("shared", "spread"), default="shared")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g = gsub.add_parser("qipg")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--lb", type=int, default=None)
    g.add_argument("--ub", type=int, default=None)
    g.add_argument("--nonconvex", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g = gsub.add_parser("cfld")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--locations", type=int, default=3)
    g.add_argument("--customers", type=int, default=3)
    g.add_argument("--designs", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    for name, helptext in (("solve", "select the best PNE"), ("enumerate", "list every PNE"), ("epsilon", "find an epsilon-PNE")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("instance")
        _solver_flags(p, mode=name == "solve")

    p = sub.add_parser("oracle", help="brute-force PNE set as JSON")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=bruteforce.DEFAULT_CAP)

    p = sub.add_parser("batch", help="solve every *.json in a directory")
    p.add_argument("directory")
    _solver_flags(p)

    p = sub.add_parser("reduce", help="problem reductions")
    rsub = p.add_subparsers(dest="problem", required=True)
    r = rsub.add_parser("bkp", help="bilevel knapsack to knapsack game")
    r.add_argument("instance")
    r.add_argument("--out", required=True)
    return ap


def _config(args, mode: str) -> SolveConfig:
    epsilon = None
    if args.epsilon is not None and args.epsilon_rel is not None:
        raise InputError("give either --epsilon or --epsilon-rel, not both")
    if mode == EPSILON_ABS and args.epsilon_rel is not None:
        mode, epsilon = EPSILON_REL, args.epsilon_rel
    elif mode == EPSILON_REL:
        epsilon = args.epsilon_rel if args.epsilon_rel is not None else args.epsilon
    elif mode == EPSILON_ABS:
        epsilon = args.epsilon
    return SolveConfig(
        mode=mode,
        epsilon=epsilon,
        limit=args.limit,
        time_limit=args.time_limit,
        cut_batch=args.cut_batch,
        strategic_cuts=args.strategic_cuts == "on",
        workers=args.jobs,
    )


def _append_csv(path: Path, row: dict) -> None:
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if new:
            w.writeheader()
        w.writerow(row)


def _solve(args, mode: str) -> int:
    config = _config(args, mode)
    loaded = instances.load(args.instance, strategic=config.strategic_cuts)
    if args.dump_lp:
        from .lifting import build_lifted_model

        Path(args.dump_lp).write_text(build_lifted_model(loaded.game).to_lp_text())
    report = run(loaded.game, config)
    text = report.to_json()
    print(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n")
        _append_csv(out.with_suffix(".csv"), report.csv_row())
    return 2 if report.status == TIME_LIMIT else 0


def _gen(args) -> int:
    if args.family == "kpg":
        obj = kpg.generate_kpg(args.n, args.m, args.dist, args.capacity, args.seed)
    elif args.family == "nfg":
        obj = nfg.generate_grid(args.vertices, args.seed, args.players, args.weights, args.endpoints)
    elif args.family == "qipg":
        lb = None if args.lb is None else [args.lb] * args.m
        ub = None if args.ub is None else [args.ub] * args.m
        obj = qipg.generate_qipg(args.n, args.m, lb, ub, not args.nonconvex, args.seed)
    else:
        obj = cfld.generate_cfld(args.n, args.locations, args.customers, args.designs, args.seed)
    instances.save(obj, args.out)
    return 0


def _oracle(args) -> int:
    loaded = instances.load(args.instance)
    res = bruteforce.all_pnes(loaded.game, args.cap)
    fr = lambda q: None if q is None else (str(q) if q.denominator != 1 else q.numerator)  # noqa: E731
    print(json.dumps({
        "pnes": [{"profile": [list(x) for x in p], "welfare": fr(w)} for p, w in res.pnes],
        "osw": fr(res.osw),
        "osw_profile": [list(x) for x in res.osw_profile],
        "pos": fr(res.pos),
        "poa": fr(res.poa),
        "profiles": res.profile_count,
    }, indent=2))
    return 0


def _batch(args) -> int:
    config = _config(args, args.mode)
    config.workers = 1
    rows, groups = batch(args.directory, config, jobs=args.jobs)
    out = args.out or str(Path(args.directory) / "batch.csv")
    write_batch_csv(out, rows, groups)
    for g in groups:
        print(f"{g['group']} Tl={g['Tl']} #EI={g['#EI']} #It={g['#It']} Time={g['Time']} PoS={g['PoS']}")
    return 0


def _reduce(args) -> int:
    bkp = kpg.BkpInstance.from_dict(instances.read_json(args.instance))
    instances.save(kpg.reduce_bkp_instance(bkp), args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s level=%(levelname)s logger=%(name)s %(message)s",
    )
    try:
        if args.command == "gen":
            return _gen(args)
        if args.command == "solve":
            return _solve(args, args.mode)
        if args.command == "enumerate":
            return _solve(args, ENUMERATE)
        if args.command == "epsilon":
            return _solve(args, EPSILON_ABS)
        if args.command == "oracle":
            return _oracle(args)
        if args.command == "batch":
            return _batch(args)
        return _reduce(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ZeroRegretsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
