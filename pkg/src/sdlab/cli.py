"""Command-line front end: ``sd-lab {classify,verify,finite,build}``.

Exit codes: 0 when every expectation is met, 1 when a violation is found,
2 on configuration or budget errors.  Every JSON report embeds the
configuration that produced it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction
from typing import Sequence

from . import finite as fo
from .box import TestBox
from .constructions import (
    ConstructionManifest,
    build_lemma37_case1,
    build_thm41_part2,
    check_manifest,
    tamper,
)
from .errors import SDLabError
from .solenoid import INF, SupernaturalSpec, as_rational, classify_solenoid
from .values import DEFAULT_TOLERANCE
from .verifier import DEFAULT_BUDGET

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
CONSTRUCTIONS = ("lemma37", "thm41p2")


class ConfigError(Exception):
    pass


def _config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}
    cfg["budget_env"] = os.environ.get("SD_LAB_BUDGET")
    return cfg


def _budget(args) -> int | None:
    """--budget beats SD_LAB_BUDGET; None lets the manifest or default decide."""
    if args.budget is not None:
        return args.budget
    env = os.environ.get("SD_LAB_BUDGET")
    return int(float(env)) if env else None


# -- classify


def cmd_classify(args) -> tuple[dict, int]:
    spec = SupernaturalSpec.parse(args.spec)
    c = classify_solenoid(spec)
    if c.case == 1:
        conclusion = (
            "no f_p is an automorphism: independence of the n linear forms forces "
            "at least one distribution to be idempotent"
        )
    else:
        conclusion = (
            f"f_{c.witness_prime} is an automorphism: there are independent forms of three "
            "variables whose distributions lie outside I(X) * Gamma(X)"
        )
    return {"spec": spec.to_json(), "classification": c.to_json(), "conclusion": conclusion}, EXIT_OK


# -- build / verify


def _manifest(args) -> ConstructionManifest:
    if getattr(args, "manifest", None):
        with open(args.manifest) as fh:
            return ConstructionManifest.from_json(json.load(fh))
    if args.construction == "lemma37":
        if args.spec is not None:
            raise ConfigError("lemma37 always uses the solenoid with Y = Q; drop --spec")
        return build_lemma37_case1(args.p, args.q, as_rational(args.c), args.n)
    if args.construction == "thm41p2":
        spec = SupernaturalSpec.parse(args.spec) if args.spec else SupernaturalSpec(0, {args.p: INF})
        return build_thm41_part2(spec, args.p, as_rational(args.y0))
    raise ConfigError("give --construction or --manifest")


def _box(args, m: ConstructionManifest) -> TestBox:
    if args.box_gens is None and args.box_bound is None:
        return m.recommended_box
    gens = [as_rational(g) for g in args.box_gens.split(",")] if args.box_gens else m.recommended_box.generators
    return TestBox(gens, args.box_bound or m.recommended_box.bound)


def _parse_tamper(text: str) -> tuple[Fraction, Fraction]:
    point, sep, value = text.partition("=")
    if not sep:
        raise ConfigError("--tamper expects POINT=VALUE, e.g. 1=3/5")
    return as_rational(point), as_rational(value)


def cmd_build(args) -> tuple[dict, int]:
    m = _manifest(args)
    return m.to_json(), EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    m = _manifest(args)
    for text in args.tamper or ():
        y, v = _parse_tamper(text)
        which = [int(i) - 1 for i in args.tamper_index.split(",")] if args.tamper_index else None
        m = tamper(m, y, v, which)
    budget = _budget(args)
    if budget is None:
        budget = m.budget or DEFAULT_BUDGET
    report = check_manifest(m, _box(args, m), args.tolerance, budget)
    result = {"manifest": m.to_json(), "report": report.to_json()}
    return result, EXIT_OK if report.ok else EXIT_VIOLATION


# -- finite


def _forms(G: fo.FiniteGroupSpec, kind: str, n: int, rng: random.Random):
    if kind == "formiT":
        if n != 3:
            raise ConfigError("formiT needs n = 3")
        return fo.formiT(G)
    if kind == "pm":
        if n == 3:
            return fo.formiT(G)
        return [[1] * n] + [[1] + [-1 if i == j else 1 for i in range(1, n)] for j in range(1, n)]
    if kind == "random":
        return [[fo.random_automorphism(G, rng) for _ in range(n)] for _ in range(n)]
    raise ConfigError(f"unknown forms {kind!r}")


def _dists(G, profile: str, n: int, rng: random.Random) -> list[fo.Dist]:
    if profile == "haar":
        return [fo.haar(G)] * n
    if profile == "mixed":
        return [fo.random_dist(G, rng, rng.choice(fo.PROFILES)) for _ in range(n)]
    if profile == "non-idempotent":
        while True:
            ds = [fo.random_dist(G, rng, rng.choice(("dirichlet", "sparse"))) for _ in range(n)]
            if not all(fo.idempotent_classify(G, d).is_shifted_idempotent for d in ds):
                return ds
    return [fo.random_dist(G, rng, profile) for _ in range(n)]


def _instance_json(G, ds, M) -> dict:
    return {
        "dists": [d.to_json()["probs"] for d in ds],
        "forms": [[fo.as_aut(G, a).to_json() for a in row] for row in M],
    }


def cmd_finite(args) -> tuple[dict, int]:
    G = fo.FiniteGroupSpec.parse(args.group)
    rng = random.Random(args.seed)
    if args.dists:
        with open(args.dists) as fh:
            data = json.load(fh)
        batches = [
            (
                [fo.Dist(G, {fo._parse_key(k): Fraction(v) for k, v in probs.items()}) for probs in data["dists"]],
                [[fo.AutMatrix(a) if isinstance(a, list) else a for a in row] for row in data["forms"]],
            )
        ]
    else:
        batches = [(_dists(G, args.profile, args.n, rng), _forms(G, args.forms, args.n, rng)) for _ in range(args.seeds)]
    cap = _budget(args) or fo.DEFAULT_TUPLE_CAP
    agree = independent = 0
    disagreements, flagged = [], []
    for ds, M in batches:
        n = len(ds)
        ind = fo.joint_independence_check(G, ds, M, cap=cap)
        eq_exact = fo.sd_equation_check(G, ds, M, exact=True, cap=cap)
        eq_float = fo.sd_equation_check(G, ds, M, exact=False, tolerance=args.tolerance, cap=cap)
        if ind == eq_exact == eq_float:
            agree += 1
        else:
            disagreements.append(_instance_json(G, ds, M))
        if ind:
            independent += 1
            forms = [[fo.as_aut(G, a) for a in row] for row in M]
            identity = fo.AutMatrix.scalar(G, 1)
            normalized = all(forms[0][i] == identity and forms[i][0] == identity for i in range(n))
            classes = [fo.idempotent_classify(G, d) for d in ds]
            common = all(c.is_shifted_idempotent for c in classes) and len({c.K for c in classes}) == 1
            if normalized and not common:
                flagged.append(_instance_json(G, ds, M))
    result = {
        "group": str(G),
        "instances": len(batches),
        "agreement": agree,
        "independent": independent,
        "disagreements": disagreements,
        "flagged_without_common_K": flagged,
    }
    return result, EXIT_OK if not disagreements else EXIT_VIOLATION


# -- plumbing


def _csv(result: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    violations = result["report"]["equation"]["violations"]
    n = len(violations[0]["point"]) if violations else 0
    w.writerow([f"u{i + 1}" for i in range(n)] + ["lhs", "rhs"])
    for v in violations:
        w.writerow(v["point"] + [json.dumps(v["lhs"]), json.dumps(v["rhs"])])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sd-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
        p.add_argument("--budget", type=int, default=None, help="point cap (overrides SD_LAB_BUDGET)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("classify", help="case 1 / case 2 dichotomy for a solenoid")
    p.add_argument("--spec", required=True, help='heights, e.g. "1", "inf", "0;2:inf"')
    common(p)
    p.set_defaults(func=cmd_classify)

    for name, func, help_ in (
        ("verify", cmd_verify, "check a construction against its expectations"),
        ("build", cmd_build, "write a construction manifest"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--construction", choices=CONSTRUCTIONS)
        p.add_argument("--spec", default=None)
        p.add_argument("--p", type=int, default=2)
        p.add_argument("--q", type=int, default=3)
        p.add_argument("--c", default="1/2")
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--y0", default="1")
        if name == "verify":
            p.add_argument("--manifest", default=None, help="manifest JSON written by build")
            p.add_argument("--box-gens", default=None, help="comma separated rationals")
            p.add_argument("--box-bound", type=int, default=None)
            p.add_argument("--tamper", action="append", help="POINT=VALUE override of f(POINT)")
            p.add_argument("--tamper-index", default=None, help="1-based function indices to tamper")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("finite", help="independence versus equation on a finite group")
    p.add_argument("--group", required=True, help='moduli, e.g. "5" or "4,3"')
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seeds", type=int, default=200, help="number of random instances")
    p.add_argument("--forms", choices=("pm", "formiT", "random"), default="pm")
    p.add_argument(
        "--profile",
        choices=("mixed", "non-idempotent", "haar") + fo.PROFILES,
        default="mixed",
    )
    p.add_argument("--dists", default=None, help='JSON file {"dists": [...], "forms": [...]}')
    common(p)
    p.set_defaults(func=cmd_finite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.format == "csv" and args.command != "verify":
            raise ConfigError("csv output is only available for verify")
        result, code = args.func(args)
    except (ConfigError, SDLabError, ValueError, OSError, ZeroDivisionError) as exc:
        result, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_CONFIG
    if args.command == "build" and code == EXIT_OK:
        text = json.dumps(result, indent=2)
    elif args.format == "csv" and code != EXIT_CONFIG:
        text = _csv(result)
    else:
        text = json.dumps({"command": args.command, "config": _config(args), "exit_code": code, **result}, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
