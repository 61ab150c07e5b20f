"""
Command-line workbench for trade-off preserving inverse optimization
- Forward solves and Pareto sweeps
- Classical, exact, linearized, SLP and KES inverse models
- Synthetic planning instances with DVH output
- Model comparison and property verification
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from config import log_level
from models.errors import InputError, SolverError, TradeoffError
from orchestrator.orchestrator import InverseOrchestrator
from workbench.documents import ProblemDocument, emit_document, read_document
from workbench.instances import (
    EXAMPLE1_KES_DELTA_SCALE,
    EXAMPLE1_POINTS,
    builtin_example1,
    dvh_frame,
    gen_planning,
    perturbed_plan,
)
from workbench.reports import comparison_frame, frame_to_csv, to_json

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2

logger = logging.getLogger("tradeoff.cli")


# Helper functions
def parse_vector(text: Optional[str], name: str, labels=None) -> Optional[np.ndarray]:
    if text is None:
        return None
    if labels is not None and text.lower() in labels:
        return labels[text.lower()].copy()
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"--{name} expects a comma-separated list of numbers, got {text!r}")


def base_documents(args) -> List[ProblemDocument]:
    """Documents named by --problem, or the built-in example"""
    if args.problem:
        return [read_document(path) for path in args.problem]
    if args.example == 1:
        return [ProblemDocument(builtin_example1(), kes={"delta_scale": EXAMPLE1_KES_DELTA_SCALE})]
    raise InputError("give --problem PATH or --example 1")


def apply_flags(document: ProblemDocument, args, model: Optional[str] = None) -> ProblemDocument:
    """Command-line flags override what the document says"""
    labels = EXAMPLE1_POINTS if args.example == 1 and not args.problem else None
    changes = {"seed": args.seed if args.seed is not None else document.seed}
    if model is not None:
        changes["model"] = model
    xhat = parse_vector(getattr(args, "xhat", None), "xhat", labels)
    if xhat is not None:
        changes["xhat"] = xhat
    alpha = parse_vector(getattr(args, "alpha", None), "alpha")
    if alpha is not None:
        changes["alpha"] = alpha

    scheme = dict(document.scheme)
    if getattr(args, "scheme", None):
        scheme["kind"] = args.scheme
    mu = parse_vector(getattr(args, "mu", None), "mu")
    if mu is not None:
        scheme["mu"] = mu.tolist()
        scheme.setdefault("kind", "general")
    if getattr(args, "kref", None) is not None:
        scheme["kref"] = args.kref
    changes["scheme"] = scheme

    kes = dict(document.kes)
    for flag, key in (("kes_fix", "fix"), ("kes_penalty", "penalty"), ("kes_delta_scale", "delta_scale"),
                      ("kes_normalization", "normalization")):
        value = getattr(args, flag, None)
        if value is not None:
            kes[key] = value
    changes["kes"] = kes

    parameters = dict(document.parameters)
    for flag in ("kappa", "grid_size", "slp_step_tol", "jobs"):
        value = getattr(args, flag, None)
        if value is not None:
            parameters[flag] = value
    changes["parameters"] = parameters
    return document.with_request(**changes)


def write_output(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def render(args, payloads) -> str:
    """JSON for everything; CSV for single reports, sweeps and tables"""
    if args.format == "csv":
        frames = []
        for payload in payloads:
            if "frame" in payload:
                frames.append(payload["frame"])
            elif payload.get("report") is not None:
                frames.append(payload["report"].frame())
            else:
                raise InputError(f"model {payload.get('model')} has no CSV form; use --format json")
        return "".join(frame_to_csv(f) for f in frames)
    cleaned = [{k: (v.to_dict(orient="records") if k == "frame" else v) for k, v in p.items()} for p in payloads]
    return to_json(cleaned[0] if len(cleaned) == 1 else cleaned)


# Subcommands
def cmd_model(args, orchestrator: InverseOrchestrator, model: str) -> int:
    documents = [apply_flags(d, args, model) for d in base_documents(args)]
    payloads = orchestrator.run_many(documents, jobs=args.jobs or 1)
    write_output(args, render(args, payloads))
    return EXIT_OK


def cmd_invert(args, orchestrator: InverseOrchestrator) -> int:
    return cmd_model(args, orchestrator, args.model)


def cmd_gen_instance(args, orchestrator: InverseOrchestrator) -> int:
    seed = args.seed if args.seed is not None else 0
    problem, instance = gen_planning(seed, args.n, args.m, args.k)
    plan = orchestrator.forward.solve_fop(problem, np.full(args.k, 1.0 / args.k))
    xhat = perturbed_plan(plan.x, seed)
    document = ProblemDocument(problem, model=args.model, xhat=xhat, seed=seed)
    write_output(args, emit_document(document))
    if args.dvh:
        with open(args.dvh, "w", encoding="utf-8") as handle:
            handle.write(frame_to_csv(dvh_frame(instance, xhat, args.bins)))
    return EXIT_OK


def cmd_verify(args, orchestrator: InverseOrchestrator) -> int:
    frames = [orchestrator.verify(apply_flags(d, args)) for d in base_documents(args)]
    if args.format == "csv":
        write_output(args, "".join(frame_to_csv(f) for f in frames))
    else:
        write_output(args, to_json([f.to_dict(orient="records") for f in frames]))
    return EXIT_OK if all(f["passed"].all() for f in frames) else EXIT_SOLVER


def cmd_compare(args, orchestrator: InverseOrchestrator) -> int:
    document = apply_flags(base_documents(args)[0], args)
    if document.xhat is None:
        raise InputError("compare needs --xhat")
    reports = orchestrator.compare(
        document.problem, document.xhat,
        reference=int(document.scheme.get("kref", 1)) - 1,
        kappa=document.parameters.get("kappa"),
        kes_delta_scale=float(document.kes.get("delta_scale", 1.0)),
    )
    if args.format == "csv":
        write_output(args, frame_to_csv(comparison_frame(reports)))
    else:
        write_output(args, to_json([r.to_dict() for r in reports]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--example", type=int, choices=[1])
    common.add_argument("--problem", nargs="+", metavar="PATH")
    common.add_argument("--xhat", help="comma-separated point, or a..e with --example 1")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--jobs", type=int)
    common.add_argument("--verbose", action="store_true")

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--scheme", choices=["relative", "absolute", "general"])
    scheme.add_argument("--mu")
    scheme.add_argument("--kref", type=int, help="reference objective, one-based")
    scheme.add_argument("--kappa", type=float)
    scheme.add_argument("--slp-step-tol", type=float)
    scheme.add_argument("--kes-fix", type=int, help="objective whose weight is fixed to one, one-based")
    scheme.add_argument("--kes-penalty", choices=["sos", "l1", "gaplinear"])
    scheme.add_argument("--kes-normalization", choices=["fix", "mu", "l1"])
    scheme.add_argument("--kes-delta-scale", type=float)

    parser = argparse.ArgumentParser(prog="tradeoff", description="Trade-off preserving inverse optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", parents=[common], help="solve FOP(alpha)")
    p.add_argument("--alpha", required=True)
    p.set_defaults(handler=lambda a, o: cmd_model(a, o, "forward"))

    p = sub.add_parser("sweep", parents=[common], help="Pareto sweep over a weight grid")
    p.add_argument("--grid-size", type=int, default=101)
    p.set_defaults(handler=lambda a, o: cmd_model(a, o, "sweep"))

    p = sub.add_parser("invert", parents=[common, scheme], help="impute weights for xhat")
    p.add_argument("--model", choices=["iop", "iop_r", "iop_a", "liop", "slp", "kes"], default="iop_r")
    p.set_defaults(handler=cmd_invert)

    p = sub.add_parser("classical", parents=[common], help="classical KKT inverse")
    p.set_defaults(handler=lambda a, o: cmd_model(a, o, "classical"))

    p = sub.add_parser("gen-instance", parents=[common], help="seeded synthetic planning instance")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--model", default="iop_r")
    p.add_argument("--dvh", metavar="PATH", help="write dose-volume curves of xhat as CSV")
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(handler=cmd_gen_instance)

    p = sub.add_parser("verify", parents=[common, scheme], help="run property checks on a document")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("compare", parents=[common, scheme], help="exact, linearized, SLP and KES side by side")
    p.set_defaults(handler=cmd_compare)
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else log_level(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args, InverseOrchestrator())
    except (InputError, ValueError) as e:
        logger.error(f"❌ {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    except (SolverError, TradeoffError) as e:
        logger.error(f"❌ {e}")
        sys.stderr.write(f"solver failure: {e}\n")
        return EXIT_SOLVER


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
