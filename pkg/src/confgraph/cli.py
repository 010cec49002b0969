"""Command-line front end.

Subcommands: validate | derive | query | verify | counterexample | examples.
Structured output goes to stdout, diagnostics to stderr. Exit codes are a
stable contract:

    0  success / Confirmed / counterexample found
    1  Unknown verdict / counterexample not found
    2  Disconfirmed
    3  input error (bad file, parse failure, infeasible sampling, oversize)
    4  soundness violation reported by verify

``CONFGRAPH_ARITY`` overrides the default proposition arity (2); an explicit
``--arity`` flag wins over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from . import dsl, engine, oracle
from .core import InferenceGraph, validate
from .errors import ConfGraphError, GraphTooLarge, Infeasible, MalformedQuery

EXIT_OK = 0
EXIT_UNKNOWN = 1
EXIT_DISCONFIRMED = 2
EXIT_INPUT = 3
EXIT_UNSOUND = 4


def _bundled() -> dict[str, str]:
    root = resources.files("confgraph") / "examples"
    return {p.name: p.read_text(encoding="utf-8") for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".igr")}


def _read_graph_text(path: str) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    bundled = _bundled()
    for key in (Path(path).name, Path(path).name + ".igr"):
        if key in bundled:
            return bundled[key]
    raise FileNotFoundError(f"no such file: {path} (and no bundled example of that name)")


def _load_graph(path: str) -> InferenceGraph:
    text = _read_graph_text(path)
    result = dsl.parse_graph(text)
    if not result.ok:
        for d in result.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise ConfGraphError(f"{path}: {len(result.errors)} parse error(s)")
    return result.graph


def _default_arity(args) -> int:
    if args.arity is not None:
        return args.arity
    env = os.environ.get("CONFGRAPH_ARITY")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfGraphError(f"CONFGRAPH_ARITY must be an integer, got {env!r}")
    return 2


def _engine_config(args) -> engine.EngineConfig:
    return engine.EngineConfig(max_arity=_default_arity(args))


def _parse_query(args, g: InferenceGraph):
    result = dsl.parse_query(args.query, g)
    if not result.ok:
        for d in result.diagnostics:
            print(f"query: {d}", file=sys.stderr)
        raise MalformedQuery(f"cannot parse query {args.query!r}")
    return result.subject, result.evidence


def cmd_validate(args) -> int:
    try:
        text = _read_graph_text(args.graph)
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    result = dsl.parse_graph(text)
    findings = [str(d) for d in result.diagnostics]
    ok = result.ok
    if ok:
        report = validate(result.graph)
        findings += [f"{f.code}: {f.message}" for f in report.findings]
        ok = report.is_valid
    if args.json:
        print(json.dumps({"graph": args.graph, "valid": ok, "findings": findings}, indent=2))
    else:
        print("valid" if ok else "invalid")
        for f in findings:
            print(f"  {f}")
    return EXIT_OK if ok else EXIT_INPUT


def cmd_query(args) -> int:
    g = _load_graph(args.graph)
    subject, evidence = _parse_query(args, g)
    closure = engine.close(g, _engine_config(args))
    verdict = closure.query(subject, evidence)
    label = verdict.kind.value.capitalize()
    if args.json:
        payload = {
            "graph": args.graph,
            "query": f"conf({subject}, {evidence})?",
            "verdict": verdict.kind.value,
            "exit_code": verdict.exit_code,
            "proof": verdict.proof.to_json() if verdict.proof else None,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(label)
        if args.proof and verdict.proof is not None:
            print(engine.explain(verdict))
    return verdict.exit_code


def cmd_derive(args) -> int:
    g = _load_graph(args.graph)
    closure = engine.close(g, _engine_config(args))
    statements = sorted(closure.statements, key=lambda s: (str(s.subject), str(s.evidence)))
    facts = sorted(closure.strength_facts, key=str)
    if args.json:
        payload = {
            "graph": args.graph,
            "arity": _default_arity(args),
            "statements": [
                {
                    "subject": str(s.subject),
                    "evidence": str(s.evidence),
                    "rule": s.proof.rule,
                    "lemma": s.proof.lemma,
                    "exact": s.proof.exact,
                    "proof": s.proof.to_json(),
                }
                for s in statements
            ],
            "strength_facts": [
                {
                    "subject": str(f.subject),
                    "stronger": str(f.stronger),
                    "weaker": str(f.weaker),
                    "exact": f.exact,
                }
                for f in facts
            ],
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    for s in statements:
        head = s.proof.rule if s.proof.lemma is None else f"{s.proof.rule}[Lemma {s.proof.lemma}]"
        flag = "" if s.proof.exact else "  [heuristic]"
        print(f"conf({s.subject}, {s.evidence})  via {head}{flag}")
    if facts:
        print()
        for f in facts:
            flag = "" if f.exact else "  [heuristic]"
            print(f"{f}  via Dilution[Lemma 4.7]{flag}")
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_graph(args.graph)
    oracle.ensure_supported(g)  # refuse oversized graphs before closing
    closure = engine.close(g, _engine_config(args))
    report = oracle.verify_closure(
        g,
        closure,
        n_samples=args.samples,
        seed=args.seed,
        margin=args.margin,
        only_exact=args.trusted_only,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        scope = "guaranteed statements" if args.trusted_only else "all statements"
        print(
            f"checked {scope} over {report.n_samples} consistent distributions: "
            f"{len(report.violations)} violation(s)"
        )
        for v in report.violations[:20]:
            print(f"  seed {v.seed}: {v.statement} (p_cond={v.p_cond}, p_prior={v.p_prior})")
        if len(report.violations) > 20:
            print(f"  ... and {len(report.violations) - 20} more")
    return EXIT_OK if report.ok else EXIT_UNSOUND


def cmd_counterexample(args) -> int:
    g = _load_graph(args.graph)
    subject, evidence = _parse_query(args, g)
    witness = oracle.find_counterexample(
        g, subject, evidence, n_samples=args.samples, seed=args.seed, margin=args.margin
    )
    if witness is None:
        if args.json:
            print(json.dumps({"found": False, "samples_tried": args.samples}, indent=2))
        else:
            print(f"NotFound after {args.samples} consistent samples")
        return EXIT_UNKNOWN
    payload = {
        "found": True,
        "seed": witness.seed,
        "p_subject": witness.p_subject,
        "p_subject_given_evidence": witness.p_cond,
        "p_evidence": witness.p_evidence,
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(
            f"witness at seed {witness.seed}: p({subject}) = {witness.p_subject:.6f}, "
            f"p({subject} | {evidence}) = {witness.p_cond:.6f}"
        )
    return EXIT_OK


def cmd_examples(args) -> int:
    bundled = _bundled()
    if args.json:
        print(json.dumps({"examples": sorted(bundled)}, indent=2))
        return EXIT_OK
    for name, text in bundled.items():
        print(name)
        if args.verbose:
            for line in text.splitlines():
                print(f"  {line}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confgraph", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, query=False, sampling=False):
        p.add_argument("graph", help="path to a .igr file, or a bundled example name")
        if query:
            p.add_argument("query", help='e.g. "conf(fly, bird)?"')
        p.add_argument("--arity", type=int, default=None, help="max conjunction width (default 2)")
        if sampling:
            p.add_argument("--samples", type=int, default=1000)
            p.add_argument("--seed", type=int, default=42)
            p.add_argument("--margin", type=float, default=oracle.DEFAULT_MARGIN)
        p.add_argument("--json", action="store_true", help="structured output")

    p = sub.add_parser("validate", help="check structural well-formedness")
    p.add_argument("graph")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("query", help="answer conf(subject, evidence)? with a verdict")
    common(p, query=True)
    p.add_argument("--proof", action="store_true", help="print the derivation tree")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("derive", help="list the full closure of derived statements")
    common(p)
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("verify", help="check the closure against sampled distributions")
    common(p, sampling=True)
    p.add_argument(
        "--trusted-only",
        action="store_true",
        help="restrict to statements whose proofs carry a full soundness guarantee",
    )
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("counterexample", help="search for a distribution refuting a statement")
    common(p, query=True, sampling=True)
    p.set_defaults(fn=cmd_counterexample)

    p = sub.add_parser("examples", help="list bundled example graphs")
    p.add_argument("--verbose", "-v", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_examples)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    except (Infeasible, GraphTooLarge, MalformedQuery) as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    except ConfGraphError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
