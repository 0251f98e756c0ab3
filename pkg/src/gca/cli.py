"""Command-line front end: ``gca mutate|pattern|verify|explore|invariant``.

Reports are JSON (sorted keys) unless ``--text`` is given.  Exit codes:
0 success, 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import matrix as mx
from .explore import check_fvector_theorems, explore
from .invariant import ClusterMonomial, Context, cluster_containment_test, pairing_report
from .pattern import SignCoherenceViolated, check_dualities, check_fpolys, walk
from .poly import NotDivisible, TermLimitExceeded
from .seed import CompatibilityBroken, Seed, mutate_seed
from .seedfile import SeedFileError, load_seed, sample_names
from .tropical import RankDeficient
from .verify import SUITES, run


class UsageError(Exception):
    pass


def parse_word(raw: str | None, n: int) -> tuple[int, ...]:
    if not raw:
        return ()
    try:
        word = [int(p) for p in raw.replace(" ", "").split(",") if p]
    except ValueError:
        raise UsageError(f"word must be comma-separated integers, got {raw!r}") from None
    bad = [k for k in word if not 1 <= k <= n]
    if bad:
        raise UsageError(f"word entries must lie in 1..{n}, got {bad}")
    return tuple(k - 1 for k in word)


def parse_monomial(raw: str, n: int, m: int) -> tuple[tuple[int, ...], list[int]]:
    """'WORD/H', e.g. '2,1/0,1' (h padded with zeros to length m)."""
    if "/" not in raw:
        raise UsageError(f"monomial must look like WORD/EXPONENTS, got {raw!r}")
    w, h = raw.split("/", 1)
    try:
        exps = [int(p) for p in h.split(",") if p]
    except ValueError:
        raise UsageError(f"exponents must be integers, got {h!r}") from None
    if len(exps) > m or any(e < 0 for e in exps):
        raise UsageError(f"exponents must be at most {m} non-negative integers")
    return parse_word(w, n), exps + [0] * (m - len(exps))


# -- commands ----------------------------------------------------------------


def cmd_mutate(args) -> tuple[dict, int]:
    sf = load_seed(args.seed)
    word = parse_word(args.word, sf.md.n)
    s = Seed.initial(sf.md, sf.Btilde)
    steps = []
    report = {"seed": sf.to_json(), "word": [k + 1 for k in word], "steps": steps}
    try:
        for k in word:
            s = mutate_seed(s, k)
            steps.append({"direction": k + 1, "new_variable": s.x[k].text(), "Btilde": mx.to_list(s.Btilde)})
    except (NotDivisible, TermLimitExceeded) as e:
        report["error"] = f"{type(e).__name__}: {e}"
        return report, 1
    report["final"] = {"Btilde": mx.to_list(s.Btilde), "cluster": [x.text() for x in s.x]}
    return report, 0


def cmd_pattern(args) -> tuple[dict, int]:
    sf = load_seed(args.seed)
    word = parse_word(args.word, sf.md.n)
    try:
        state = walk(sf.md, sf.Btilde, word)
    except SignCoherenceViolated as e:
        return {"seed": sf.to_json(), "error": str(e)}, 1
    checks = check_dualities(state) + check_fpolys(state)
    report = {"seed": sf.to_json(), "pattern": state.to_json(), "checks": checks,
              "pass": all(c["pass"] for c in checks)}
    return report, 0 if report["pass"] else 1


def cmd_verify(args) -> tuple[dict, int]:
    if args.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    seed_checks = []
    instances = None
    if args.seed:
        sf = load_seed(args.seed)
        try:
            sf.pair()
            seed_checks.append({"name": "compatible pair", "pass": True})
        except CompatibilityBroken as e:
            seed_checks.append({"name": "compatible pair", "pass": False,
                                "witness": {"error": "CompatibilityBroken", "message": str(e),
                                            "detail": e.witness}})
        instances = [sf.instance()]
    report = run(args.suite, args.trials, args.depth, args.rand_seed, instances)
    report["seed_checks"] = seed_checks
    report["pass"] = report["pass"] and all(c["pass"] for c in seed_checks)
    return report, 0 if report["pass"] else 1


def cmd_explore(args) -> tuple[dict, int]:
    sf = load_seed(args.seed)
    g = explore(sf.md, sf.Btilde, args.budget, args.unlabeled)
    report = {"seed": sf.to_json(), "graph": g.to_json()}
    if not g.closed:
        report["graph"]["flag"] = "ExplorationBudgetExceeded"
    code = 0
    if args.check:
        checks = check_fvector_theorems(g)
        failed = [c for c in checks if not c["pass"]]
        report["fvector_checks"] = {"count": len(checks), "failures": len(failed),
                                    "first_failure": failed[0] if failed else None}
        code = 1 if failed else 0
    return report, code


def cmd_invariant(args) -> tuple[dict, int]:
    sf = load_seed(args.seed)
    md = sf.md
    try:
        ctx = Context(md, sf.Btilde, sf.pair())
    except (CompatibilityBroken, RankDeficient) as e:
        return {"seed": sf.to_json(), "error": f"{type(e).__name__}: {e}"}, 1
    if not args.u or not args.v:
        raise UsageError("invariant needs --u and --v")
    u = ClusterMonomial(ctx, *parse_monomial(args.u, md.n, md.m))
    v = ClusterMonomial(ctx, *parse_monomial(args.v, md.n, md.m))
    word = parse_word(args.word, md.n)
    vertices = [word[:i] for i in range(len(word) + 1)]
    report = pairing_report(ctx, u, v, vertices)
    report["containment"] = {"u": cluster_containment_test(ctx, u), "v": cluster_containment_test(ctx, v)}
    report["pass"] = all(c["pass"] for c in report["checks"])
    return report, 0 if report["pass"] else 1


COMMANDS = {"mutate": cmd_mutate, "pattern": cmd_pattern, "verify": cmd_verify,
            "explore": cmd_explore, "invariant": cmd_invariant}


# -- output ------------------------------------------------------------------


def render_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(f"{pad}- {_scalar(v)}" if _flat(v) or not isinstance(v, (dict, list))
                         else f"{pad}-\n{render_text(v, indent + 1)}" for v in obj)
    return pad + _scalar(obj)


def _flat(v) -> bool:
    if isinstance(v, list):
        return all(not isinstance(x, dict) and (not isinstance(x, list) or _flat(x)) for x in v)
    return not isinstance(v, dict)


def _scalar(v) -> str:
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    if v is None:
        return "-"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gca", description="Exact computations in generalized cluster algebras.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--seed", help=f"seed file, or a sample name ({', '.join(sample_names())})")
    p.add_argument("--word", default="", help="mutation directions, 1-based, e.g. 2,1,2")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--budget", type=int, default=500, help="maximum number of seeds to explore")
    p.add_argument("--rand-seed", type=int, default=0)
    p.add_argument("--suite", default="all")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--text", action="store_true", help="human-readable report")
    p.add_argument("--unlabeled", action="store_true", help="identify seeds up to r-preserving relabeling")
    p.add_argument("--check", action="store_true", help="explore: also check the f-vector theorems")
    p.add_argument("--u", help="invariant: first cluster monomial as WORD/EXPONENTS")
    p.add_argument("--v", help="invariant: second cluster monomial as WORD/EXPONENTS")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name in ("depth", "trials", "budget"):
            if getattr(args, name) < 1:
                raise UsageError(f"--{name} must be positive")
        if args.command != "verify" and not args.seed:
            raise UsageError(f"{args.command} needs --seed")
        report, code = COMMANDS[args.command](args)
    except (UsageError, SeedFileError) as e:
        print(f"gca: error: {e}", file=sys.stderr)
        return 2
    out = render_text(report) if args.text else json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
