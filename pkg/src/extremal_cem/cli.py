"""Command-line entry point: ``extremal-cem {search,verify,eval}``.

Exit codes: 0 on success, 1 on errors or failed checks, 2 when a search
finds a construction beating the problem's threshold.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from . import graph as G
from .cem import CemConfig, Session, run
from .encoding import ConstructionSpace, decode, format_word
from .linalg import charpoly_exact, format_matrix, parse_matrix, permanent
from .rewards import PROBLEMS, avoids_312, get_score_fn
from .verify import SUITES, f312_oracle, run_suite

EXIT_OK, EXIT_ERROR, EXIT_FOUND = 0, 1, 2

# key -> (type, CemConfig field or None)
CONFIG_KEYS = {
    "problem": (str, None),
    "n": (int, None),
    "batch_size": (int, "batch_size"),
    "select_percentile": (float, "select_percentile"),
    "survive_percentile": (float, "survive_percentile"),
    "lr": (float, "lr"),
    "max_iterations": (int, "max_iterations"),
    "seed": (int, "rng_seed"),
    "target_threshold": (float, "target_threshold"),
    "out_dir": (str, None),
    "checkpoint_every": (int, "checkpoint_every"),
    "penalty": (float, "penalty"),
    "workers": (int, "workers"),
}

INVARIANTS = ("lambda1", "mu", "proximity", "diameter", "dspec", "dlap-charpoly", "permanent", "avoids312", "peaks")
MATRIX_INVARIANTS = ("permanent", "avoids312")


class ConfigError(ValueError):
    pass


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _convert(key, value.strip(), f"{path}:{lineno}")
    return out


def _convert(key: str, value: str, where: str):
    typ = CONFIG_KEYS[key][0]
    try:
        return typ(value)
    except ValueError:
        raise ConfigError(f"{where}: {key} expects {typ.__name__}, got {value!r}") from None


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; 2 is reserved for "counterexample found"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="extremal-cem", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("search", help="run the cross-entropy search on a problem")
    s.add_argument("--config", help="key = value file; flags override it")
    s.add_argument("--problem", choices=PROBLEMS)
    for key, (typ, _) in CONFIG_KEYS.items():
        if key != "problem":
            s.add_argument("--" + key.replace("_", "-"), dest=key, type=typ)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", help=f"one of {', '.join(SUITES)}, all")
    v.add_argument("--stretch", action="store_true", help="also run the 8 x 8 exhaustive permanent search")

    e = sub.add_parser("eval", help="evaluate an invariant of a construction file")
    e.add_argument("input", help="edge-list or matrix text file ('-' for stdin)")
    e.add_argument("invariant", choices=INVARIANTS)
    return parser


def _construction_text(space: ConstructionSpace, word) -> str:
    obj = decode(space, word)
    if space.kind in ("graph_edges", "prufer_tree"):
        return G.format_edge_list(obj)
    if space.kind == "binary_matrix":
        return format_matrix(obj)
    if space.kind == "graph_pair":
        return G.format_edge_list(obj[0]) + "\n" + G.format_edge_list(obj[1])
    return format_word(space, word) + "\n"


def cmd_search(args) -> int:
    settings = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    if "problem" not in settings or "n" not in settings:
        raise ConfigError("search needs a problem and n")
    problem = settings["problem"]
    if problem not in PROBLEMS:
        raise ConfigError(f"unknown problem {problem!r}")
    cfg_kwargs = {field: settings[key] for key, (_, field) in CONFIG_KEYS.items() if field and key in settings}
    cfg_kwargs.setdefault("workers", os.cpu_count() or 1)
    score = get_score_fn(
        problem,
        settings["n"],
        penalty=cfg_kwargs.get("penalty", -10000.0),
        threshold=settings.get("target_threshold"),
    )
    cfg_kwargs["target_threshold"] = score.threshold
    cfg = CemConfig(**cfg_kwargs)
    out_dir = settings.get("out_dir") or f"cem-{problem}-n{settings['n']}-seed{cfg.rng_seed}"
    os.makedirs(out_dir, exist_ok=True)
    best_path = os.path.join(out_dir, "best.txt")

    def on_improve(sess: Session) -> None:
        tmp = best_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(_construction_text(score.space, sess.word))
        os.replace(tmp, best_path)

    result = run(
        cfg,
        score.space,
        score,
        log_path=os.path.join(out_dir, "log.jsonl"),
        csv_path=os.path.join(out_dir, "curve.csv"),
        out_dir=out_dir,
        on_improve=on_improve,
    )
    refuted = result.reached_threshold
    print(f"best_reward = {_fmt(result.best.reward)}")
    print(f"threshold = {_fmt(score.threshold) if score.threshold is not None else 'none'}")
    print(f"iterations = {len(result.history)}")
    print(f"refuted = {'yes' if refuted else 'no'}")
    print(f"best_construction = {best_path}")
    return EXIT_FOUND if refuted else EXIT_OK


def cmd_verify(args) -> int:
    try:
        reports = run_suite(args.suite)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_ERROR
    ok = True
    for rep in reports:
        print(rep)
        if rep.skipped:
            print(f"warning: {rep.name} skipped ({rep.note})", file=sys.stderr)
        ok &= rep.passed
    if args.stretch:
        val, _ = f312_oracle(8, allow_stretch=True)
        good = val == 120
        print(f"[{'PASS' if good else 'FAIL'}] f312-stretch\n  {'ok' if good else 'FAILED':<13} f312(8) = 120  (oracle = {val})")
        ok &= good
    print(f"summary = {sum(r.passed for r in reports)}/{len(reports)} suites passed")
    return EXIT_OK if ok else EXIT_ERROR


def cmd_eval(args) -> int:
    text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
    inv = args.invariant
    if inv in MATRIX_INVARIANTS:
        m = parse_matrix(text)
        if inv == "permanent":
            print(f"permanent = {permanent(m)}")
        else:
            print(f"avoids312 = {str(avoids_312(m)).lower()}")
        return EXIT_OK
    g = G.parse_edge_list(text)
    if inv == "lambda1":
        print(f"lambda1 = {_fmt(G.lambda1(g))}")
    elif inv == "mu":
        print(f"mu = {G.matching_number(g)}")
    elif inv == "proximity":
        print(f"proximity = {_fmt(G.proximity(g))}")
    elif inv == "diameter":
        print(f"diameter = {G.diameter(g)}")
    elif inv == "dspec":
        print("dspec = " + " ".join(_fmt(float(x)) for x in G.distance_spectrum(g)))
    elif inv == "dlap-charpoly":
        print("dlap-charpoly = " + " ".join(map(str, charpoly_exact(G.distance_laplacian(g)))))
    elif inv == "peaks":
        prof = G.peak_profile(g)
        print(f"p_A = {prof.p_A}")
        print(f"m = {prof.m}")
        print(f"p_D = {prof.p_D}")
        print(f"n_terms = {prof.n_terms}")
        print(f"f = {prof.f}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handlers = {"search": cmd_search, "verify": cmd_verify, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
