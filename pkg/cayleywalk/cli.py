"""Command-line entry point.

Every command prints one report body on stdout: JSON (``schema: 1``) by default, CSV
for the tabular commands. Exit codes: 0 success, 2 validation error, 3 cap exceeded or
inconclusive result.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

import numpy as np
import sympy

from . import __version__
from .cayley import (edge_cycle_spectrum, girth, phi_upper_bound, root_stabilizer_search,
                     verify_bs_sheet)
from .config import EngineConfig, load_config, setup_logging
from .controller import GroupController
from .errors import CayleyWalkError, ValidationError
from .grigorchuk import grig_is_identity, grig_reduce, grig_search_badcycles, grig_tree_action
from .heightfn import (HeightAssignment, bridge_predicate, is_harmonic, solve_group_height_function,
                       verify_graph_height_function)
from .obstructions import (STATUS_INCONCLUSIVE, higman_quotient_search, involution_ghf_obstruction,
                           torsion_obstruction)
from .oracles import GrigorchukOracle, TreeOracle, order_of_element, verify_relators
from .saw import (check_subadditivity, check_supermultiplicativity, classify_saw_edges, count_bridges,
                  count_saws, mu_lower_bounds_from_bridges, mu_upper_bounds)
from .spectral import (STATUS_CONDITIONAL, STATUS_CONJECTURAL, STATUS_EXACT, BoundParams,
                       check_lambda_sandwich, girth_lambda_bound, lambda_estimate_from_ball, lambda_tree,
                       mu_basic_bounds, mu_lower_girth, mu_lower_nonamenable, nonamenable_constant,
                       return_probabilities, return_probabilities_tree)
from .words import parse_presentation

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 12
NOT_INPUTS = {"handler", "workers", "format", "manifest", "config", "log_level", "log_file"}
GRIG_COMPACT_RE = re.compile(r"^[abcd]*$")
MAX_PERMUTATION_OUTPUT = 256
GRIG_TERMS = parse_presentation("gens a b c d\ninv a b c d\n", "grigorchuk-abcd")
SAW_CSV_HEADER = ["n", "sigma_n", "beta_n", "fekete_bound"]


@dataclass
class CommandResult:
    result: Dict[str, Any]
    exit_code: int = 0
    csv_header: Optional[List[str]] = None
    csv_rows: Optional[List[List[Any]]] = None


@dataclass
class RunManifest:
    tool_version: str
    group: Optional[str]
    presentation_digest: Optional[str]
    command: str
    flags: Dict[str, Any]
    workers: int
    wall_time: float
    output_digest: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class _Context:
    def __init__(self, args: argparse.Namespace, config: EngineConfig,
                 shared: Optional[GroupController] = None):
        self.args = args
        self.config = config
        self._shared = shared
        self._controller: Optional[GroupController] = None

    def _shared_matches(self, group: Optional[str], path: Optional[str]) -> bool:
        shared = self._shared
        if shared is None or not shared.group_loaded:
            return False
        if group is None and path is None:
            return True
        if group is not None and path is not None:
            return False
        if path is not None:
            return shared.presentation_file == path
        return shared.presentation_file is None and shared.group_name == group.strip().lower()

    @property
    def controller(self) -> GroupController:
        if self._controller is None:
            group = getattr(self.args, "group", None)
            path = getattr(self.args, "file", None)
            if self._shared_matches(group, path):
                self._controller = self._shared
            elif group is None and path is None:
                raise ValidationError("This command needs --group or --file")
            else:
                self._controller = GroupController(self.config)
                self._controller.load_group(group, path)
        return self._controller

    @property
    def group_label(self) -> Optional[str]:
        if self._controller is not None:
            return self._controller.group_name
        return getattr(self.args, "group", None)

    @property
    def presentation_digest(self) -> Optional[str]:
        if self._controller is not None and self._controller.presentation is not None:
            return self._controller.presentation.digest()
        return None


def _clean(value: Any) -> Any:
    """JSON-ready copy with floats at fixed significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, sympy.Basic):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return str(value)


def _csv_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def _parse_heights(ctx: _Context, text: Optional[str]) -> HeightAssignment:
    p = ctx.controller.require_presentation()
    if text:
        return HeightAssignment.parse(p, text)
    certificate = solve_group_height_function(p, ctx.config.family_cap)
    if certificate.witness is None:
        raise ValidationError(f"'{ctx.group_label}' has no group height function; pass --heights",
                              {"obstruction": certificate.obstruction})
    return certificate.witness


def _grig_word(text: str) -> str:
    compact = text.replace(" ", "")
    if GRIG_COMPACT_RE.match(compact):
        return grig_reduce(compact)
    word = GRIG_TERMS.parse_word(text)
    return grig_reduce(GRIG_TERMS.generators[i].name for i, _ in word)


# group structure

def _cmd_parse(args, ctx: _Context) -> CommandResult:
    controller = ctx.controller
    p = controller.require_presentation()
    result: Dict[str, Any] = {"presentation": p.summary()}
    if controller.oracle is not None:
        cap = args.family_cap if args.family_cap is not None else ctx.config.family_cap
        report = verify_relators(controller.oracle, p, cap)
        result["relator_check"] = {
            "all_passed": report.all_passed,
            "family_cap": cap,
            "checks": [{"source": c.source, "length": len(c.relator.split()), "passed": c.passed}
                       for c in report.checks],
        }
    return CommandResult(result)


def _cmd_ball(args, ctx: _Context) -> CommandResult:
    ball = ctx.controller.ball(args.radius)
    return CommandResult(ball.to_json() if args.edges else ball.summary())


def _cmd_girth(args, ctx: _Context) -> CommandResult:
    return CommandResult(girth(ctx.controller.ball(args.radius)).to_dict())


def _cmd_cycles(args, ctx: _Context) -> CommandResult:
    ball = ctx.controller.ball(args.radius)
    cap = args.cap if args.cap is not None else 2 * args.radius
    return CommandResult(edge_cycle_spectrum(ball, cap).to_dict())


def _cmd_stab(args, ctx: _Context) -> CommandResult:
    ball = ctx.controller.ball(args.radius)
    report = root_stabilizer_search(ball, ctx.config.stabilizer_vertex_cap,
                                    ctx.config.stabilizer_max_automorphisms, args.transport_depth)
    return CommandResult(report.to_dict())


def _cmd_phi(args, ctx: _Context) -> CommandResult:
    ball = ctx.controller.ball(args.radius)
    result = phi_upper_bound(ball, args.max_set_size, ctx.config.phi_budget, ctx.config.phi_exhaustive_size)
    return CommandResult(result.to_dict())


def _cmd_bs_check(args, ctx: _Context) -> CommandResult:
    report = verify_bs_sheet(ctx.controller.ball(args.radius))
    return CommandResult(report.to_dict(), 0 if report.all_passed else 3)


# walks

def _cmd_saw_count(args, ctx: _Context) -> CommandResult:
    radius = args.radius if args.radius is not None else args.max_len
    ball = ctx.controller.ball(radius)
    report = count_saws(ball, args.max_len, ctx.config.workers, ctx.config.saw_prefix_depth)
    result = report.to_dict()
    result["mu_upper"] = mu_upper_bounds(report).to_dict() if args.max_len >= 1 else None
    result["subadditivity_violations"] = check_subadditivity(report.counts)
    return CommandResult(result, 0, SAW_CSV_HEADER, report.csv_rows())


def _cmd_saw_bridges(args, ctx: _Context) -> CommandResult:
    radius = args.radius if args.radius is not None else args.max_len
    ball = ctx.controller.ball(radius)
    h = _parse_heights(ctx, args.heights)
    report = count_saws(ball, args.max_len, ctx.config.workers, ctx.config.saw_prefix_depth)
    bridges = count_bridges(ball, h, args.max_len, ctx.config.workers, ctx.config.saw_prefix_depth)
    report.bridges = bridges
    result = report.to_dict()
    result["heights"] = h.as_dict()
    result["mu_lower_from_bridges"] = mu_lower_bounds_from_bridges(bridges)
    result["supermultiplicativity_violations"] = check_supermultiplicativity(bridges)
    return CommandResult(result, 0, SAW_CSV_HEADER, report.csv_rows())


def _cmd_saw_color(args, ctx: _Context) -> CommandResult:
    p = ctx.controller.require_presentation()
    word = p.parse_word(args.path)
    steps = len(word)
    radius = args.radius if args.radius is not None else steps + args.horizon + 1
    ball = ctx.controller.ball(radius)
    path = ball.walk(word)
    lam = args.lam
    if lam is None and isinstance(ctx.controller.oracle, TreeOracle):
        lam = lambda_tree(ball.degree).value
    coloring = classify_saw_edges(ball, path, args.horizon, lam, strict=not args.lenient,
                                  max_visits=ctx.config.extendability_max_visits)
    result = coloring.to_dict()
    result["path"] = p.format_word(word)
    result["radius"] = radius
    result["mid_edge_excluded"] = True
    return CommandResult(result, 3 if coloring.unknown else 0)


# height functions

def _cmd_ghf_solve(args, ctx: _Context) -> CommandResult:
    p = ctx.controller.require_presentation()
    cap = args.family_cap if args.family_cap is not None else ctx.config.family_cap
    return CommandResult(solve_group_height_function(p, cap).to_dict())


def _cmd_ghf_verify(args, ctx: _Context) -> CommandResult:
    p = ctx.controller.require_presentation()
    ball = ctx.controller.ball(args.radius)
    h = _parse_heights(ctx, args.heights)
    if args.translations:
        translations = [p.parse_word(t) for t in args.translations.split(";")]
    else:
        translations = [p.parse_word(name) for name in p.generator_names]
    report = verify_graph_height_function(ball, h, translations)
    result = report.to_dict()
    result["heights"] = h.as_dict()
    if args.bridge:
        path = ball.walk(p.parse_word(args.bridge))
        result["bridge"] = {"path": args.bridge, "is_bridge": bridge_predicate(ball, path, h)}
    return CommandResult(result)


def _cmd_ghf_harmonic(args, ctx: _Context) -> CommandResult:
    ball = ctx.controller.ball(args.radius)
    h = _parse_heights(ctx, args.heights)
    result = is_harmonic(ball, h).to_dict()
    result["heights"] = h.as_dict()
    return CommandResult(result)


# spectral

def _cmd_spec_return_probs(args, ctx: _Context) -> CommandResult:
    oracle = ctx.controller.require_oracle()
    method = args.method
    if method == "auto":
        method = "tree-chain" if isinstance(oracle, TreeOracle) else "ball"
    if method == "tree-chain":
        if not isinstance(oracle, TreeOracle):
            raise ValidationError("tree-chain method needs a tree:<Delta> group")
        series = return_probabilities_tree(oracle.delta, args.max_half_time)
    else:
        radius = args.radius if args.radius is not None else args.max_half_time
        series = return_probabilities(ctx.controller.ball(radius), args.max_half_time, ctx.config.exact_limit)
    result = series.to_dict()
    if series.max_half_time >= 1:
        result["lambda_estimate"] = lambda_estimate_from_ball(series).to_dict()
    rows = [[n, row["p_2n"], row.get("rho_n", ""), row.get("lambda_upper", "")]
            for n, row in enumerate(result["series"])]
    return CommandResult(result, 0, ["n", "p_2n", "rho_n", "lambda_upper"], rows)


def _cmd_spec_bounds(args, ctx: _Context) -> CommandResult:
    delta = args.delta
    if args.lam is None:
        lam: Any = lambda_tree(delta).expr
        status = STATUS_EXACT
        source = "lambda(T_Delta)"
    else:
        lam = sympy.nsimplify(args.lam, rational=True) if args.lambda_status == STATUS_EXACT else args.lam
        status = args.lambda_status
        source = "user"
    const_c = args.const_c if args.const_c is not None else ctx.config.theorem_constant
    params = BoundParams(delta, lam, args.girth, const_c, status)
    result: Dict[str, Any] = {
        "params": params.to_dict(),
        "lambda_source": source,
        "basic": {k: v.to_dict() for k, v in mu_basic_bounds(delta).items()},
        "lambda_tree": lambda_tree(delta).to_dict(),
        "c": str(nonamenable_constant(delta)),
        "mu_lower_nonamenable": mu_lower_nonamenable(params).to_dict(),
    }
    if sympy.sympify(lam) != 0:
        result["mu_lower_girth"] = mu_lower_girth(params).to_dict()
    if args.girth is not None:
        result["lambda_girth_bound"] = girth_lambda_bound(delta, args.girth).to_dict()
    if args.phi is not None:
        phi = sympy.nsimplify(args.phi, rational=True)
        result["sandwich"] = check_lambda_sandwich(phi, lam).to_dict()
    return CommandResult(result)


# grigorchuk

def _cmd_grig_reduce(args, ctx: _Context) -> CommandResult:
    return CommandResult({"word": args.word, "reduced": _grig_word(args.word)})


def _cmd_grig_is_id(args, ctx: _Context) -> CommandResult:
    w = _grig_word(args.word)
    return CommandResult({"word": args.word, "reduced": w, "is_identity": grig_is_identity(w)})


def _cmd_grig_order(args, ctx: _Context) -> CommandResult:
    cap = args.cap if args.cap is not None else ctx.config.order_cap
    w = _grig_word(args.word)
    result = order_of_element(GrigorchukOracle(), w, cap).to_dict()
    result.update({"word": args.word, "reduced": w})
    return CommandResult(result, 0 if result["order"] is not None else 3)


def _cmd_grig_search(args, ctx: _Context) -> CommandResult:
    solutions = grig_search_badcycles()
    return CommandResult({"assignments_checked": 2 ** 7, "solutions": ["".join(s) for s in solutions]})


def _cmd_grig_action(args, ctx: _Context) -> CommandResult:
    w = _grig_word(args.word)
    action = grig_tree_action(w, args.depth)
    perm = action.permutation
    result: Dict[str, Any] = {
        "word": args.word,
        "reduced": w,
        "depth": args.depth,
        "is_identity": action.is_identity(),
        "is_tree_automorphism": action.is_tree_automorphism(),
        "fixed_leaves": int((perm == np.arange(len(perm))).sum()),
    }
    if len(perm) <= MAX_PERMUTATION_OUTPUT:
        result["permutation"] = [int(x) for x in perm]
    if args.leaf:
        result["leaf"] = {"from": args.leaf, "to": action.apply(args.leaf)}
    return CommandResult(result)


# obstructions

def _cmd_obstruct_torsion(args, ctx: _Context) -> CommandResult:
    oracle = ctx.controller.require_oracle()
    cap = args.order_cap if args.order_cap is not None else ctx.config.order_cap
    report = torsion_obstruction(oracle, args.word_len_cap, cap, ctx.config.vertex_cap)
    return CommandResult(report.to_dict(), 3 if report.status == STATUS_INCONCLUSIVE else 0)


def _cmd_obstruct_higman(args, ctx: _Context) -> CommandResult:
    return CommandResult(higman_quotient_search(args.bound, ctx.config.workers).to_dict())


def _cmd_obstruct_involution(args, ctx: _Context) -> CommandResult:
    return CommandResult(involution_ghf_obstruction(ctx.controller.require_presentation()).to_dict())


def _cmd_serve(args, ctx: _Context) -> CommandResult:
    from . import api_server
    api_server.controller.set_config(ctx.config)
    try:
        api_server.run_server(args.host, args.port, args.debug)
    except KeyboardInterrupt:
        logger.info("Server stopped by user")
    return CommandResult({"stopped": True})


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", help="Registered group name, e.g. z2, tree:3, bs12, grigorchuk, higman")
    common.add_argument("--file", help="Presentation file (gens/inv/rel/family lines)")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="Report format")
    common.add_argument("--workers", type=int, help="Worker processes for enumeration and search")
    common.add_argument("--config", help="Engine config file (JSON or YAML)")
    common.add_argument("--manifest", help="Write the run manifest to this path")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="cayleywalk", description="SAW counts, height functions and "
                                     "spectral bounds on Cayley graphs")
    parser.add_argument("--version", action="version", version=f"cayleywalk {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def leaf(subparsers, name: str, handler: Callable, help_text: str,
             aliases: Sequence[str] = ()) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, parents=[common], help=help_text, aliases=list(aliases))
        sub.set_defaults(handler=handler)
        return sub

    def group(name: str, help_text: str):
        sub = commands.add_parser(name, help=help_text)
        return sub.add_subparsers(dest="subcommand", required=True)

    sub = leaf(commands, "parse", _cmd_parse, "Show a presentation and check its relators against the oracle")
    sub.add_argument("--family-cap", type=int, help="Highest relator-family index to check")

    sub = leaf(commands, "ball", _cmd_ball, "Build a ball and report its layers")
    sub.add_argument("--radius", type=int, default=3)
    sub.add_argument("--edges", action="store_true", help="Include the labelled edge list")

    sub = leaf(commands, "girth", _cmd_girth, "Shortest cycle through the root")
    sub.add_argument("--radius", type=int, default=4)

    sub = leaf(commands, "cycles", _cmd_cycles, "Cycle lengths through each root edge")
    sub.add_argument("--radius", type=int, default=4)
    sub.add_argument("--cap", type=int, help="Longest cycle to count (default 2r)")

    sub = leaf(commands, "stab", _cmd_stab, "Root-fixing automorphisms of a ball")
    sub.add_argument("--radius", type=int, default=3)
    sub.add_argument("--transport-depth", type=int, help="Depth for the edge-type transport check (default r-2)")

    sub = leaf(commands, "phi", _cmd_phi, "Upper bound on the edge-isoperimetric constant")
    sub.add_argument("--radius", type=int, default=6)
    sub.add_argument("--max-set-size", type=int, default=10)

    sub = leaf(commands, "bs-check", _cmd_bs_check, "Five-cycle structure of the BS(1,2) Cayley graph")
    sub.add_argument("--radius", type=int, default=6)

    saw = group("saw", "Self-avoiding walk enumeration")
    sub = leaf(saw, "count", _cmd_saw_count, "Count SAWs and Fekete bounds")
    sub.add_argument("--max-len", type=int, required=True)
    sub.add_argument("--radius", type=int, help="Ball radius (default max-len)")
    sub = leaf(saw, "bridges", _cmd_saw_bridges, "Count bridges for a height function")
    sub.add_argument("--max-len", type=int, required=True)
    sub.add_argument("--radius", type=int)
    sub.add_argument("--heights", help="Generator heights, e.g. x=1,y=0 (default: solved witness)")
    sub = leaf(saw, "color", _cmd_saw_color, "Red/blue classification of edges off an extendable SAW")
    sub.add_argument("--path", required=True, help="Word spelling the SAW, e.g. 'x x y y'")
    sub.add_argument("--horizon", type=int, default=2)
    sub.add_argument("--lambda", dest="lam", type=float, help="lambda for the blue-count bound")
    sub.add_argument("--radius", type=int)
    sub.add_argument("--lenient", action="store_true", help="Report unknown edges instead of failing")

    ghf = group("ghf", "Height functions")
    sub = leaf(ghf, "solve", _cmd_ghf_solve, "Decide whether a group height function exists")
    sub.add_argument("--family-cap", type=int)
    sub = leaf(ghf, "verify", _cmd_ghf_verify, "Check the graph height function axioms on a ball")
    sub.add_argument("--radius", type=int, default=4)
    sub.add_argument("--heights")
    sub.add_argument("--translations", help="Semicolon-separated words, e.g. 'x;y' (default: generators)")
    sub.add_argument("--bridge", help="Also evaluate the bridge predicate on this word")
    sub = leaf(ghf, "harmonic", _cmd_ghf_harmonic, "Mean-value check at interior vertices")
    sub.add_argument("--radius", type=int, default=4)
    sub.add_argument("--heights")

    spec = group("spec", "Return probabilities and closed-form bounds")
    sub = leaf(spec, "return-probs", _cmd_spec_return_probs, "Return probabilities p_2n and rho_n")
    sub.add_argument("--max-half-time", type=int, required=True)
    sub.add_argument("--radius", type=int)
    sub.add_argument("--method", choices=["auto", "ball", "tree-chain"], default="auto")
    sub = leaf(spec, "bounds", _cmd_spec_bounds, "Evaluate the mu and lambda bound formulas")
    sub.add_argument("--delta", type=int, required=True)
    sub.add_argument("--lambda", dest="lam", type=float)
    sub.add_argument("--lambda-status", choices=[STATUS_EXACT, STATUS_CONDITIONAL, STATUS_CONJECTURAL],
                     default=STATUS_CONDITIONAL)
    sub.add_argument("--girth", type=int)
    sub.add_argument("--const-c", type=float, help="Constant C of the girth bound (default from config)")
    sub.add_argument("--phi", type=float, help="Edge-isoperimetric constant for the sandwich check")

    grig = group("grig", "Grigorchuk group arithmetic")
    sub = leaf(grig, "reduce", _cmd_grig_reduce, "Canonical alternating form")
    sub.add_argument("word")
    sub = leaf(grig, "is-id", _cmd_grig_is_id, "Word problem")
    sub.add_argument("word")
    sub = leaf(grig, "order", _cmd_grig_order, "Element order")
    sub.add_argument("word")
    sub.add_argument("--cap", type=int)
    leaf(grig, "search-10-4", _cmd_grig_search, "Exhaustive search over x2..x8 in {b, c}",
         aliases=["search-badcycles"])
    sub = leaf(grig, "action", _cmd_grig_action, "Action on the leaves at a given depth")
    sub.add_argument("word")
    sub.add_argument("--depth", type=int, default=4)
    sub.add_argument("--leaf", help="Leaf bitstring to map")

    obstruct = group("obstruct", "Height function obstructions")
    sub = leaf(obstruct, "torsion", _cmd_obstruct_torsion, "Element orders up to a word length")
    sub.add_argument("--word-len-cap", type=int, default=4)
    sub.add_argument("--order-cap", type=int)
    sub = leaf(obstruct, "higman", _cmd_obstruct_higman, "Finite quotient divisibility search")
    sub.add_argument("--bound", type=int, default=10_000)
    leaf(obstruct, "involution", _cmd_obstruct_involution, "Forced zero heights from involutions")

    sub = leaf(commands, "serve", _cmd_serve, "Run the JSON API server")
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--port", type=int, default=8000)
    sub.add_argument("--debug", action="store_true")
    return parser


def _command_name(args: argparse.Namespace) -> str:
    return " ".join(x for x in (args.command, getattr(args, "subcommand", None)) if x)


def _inputs(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_INPUTS and k not in ("command", "subcommand")}


def _render(args, ctx: Optional[_Context], outcome: CommandResult) -> str:
    if args.format == "csv":
        if outcome.csv_rows is None:
            raise ValidationError(f"'{_command_name(args)}' has no CSV output; use --format json")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(outcome.csv_header)
        for row in outcome.csv_rows:
            writer.writerow([_csv_cell(c) for c in row])
        return buffer.getvalue()
    body = {
        "schema": SCHEMA_VERSION,
        "command": _command_name(args),
        "group": ctx.group_label if ctx else None,
        "inputs": _clean(_inputs(args)),
        "result": _clean(outcome.result),
    }
    return json.dumps(body, indent=2) + "\n"


def _error_body(command: str, error: CayleyWalkError) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, "command": command, "error": error.to_dict()}, indent=2) + "\n"


def _emit_manifest(args, ctx: _Context, text: str, wall_time: float) -> RunManifest:
    manifest = RunManifest(
        tool_version=__version__,
        group=ctx.group_label,
        presentation_digest=ctx.presentation_digest,
        command=_command_name(args),
        flags=_clean(_inputs(args)),
        workers=ctx.config.workers,
        wall_time=round(wall_time, 3),
        output_digest=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(manifest.to_dict(), fh, indent=2)
    else:
        logger.info(f"Manifest: {json.dumps(manifest.to_dict())}")
    return manifest


def _resolve_config(args: argparse.Namespace, config: Optional[EngineConfig]) -> EngineConfig:
    if config is None or args.config is not None:
        return load_config(args.config, workers=args.workers, log_level=args.log_level)
    overrides = {k: v for k, v in (("workers", args.workers), ("log_level", args.log_level)) if v is not None}
    resolved = replace(config, **overrides)
    if not resolved.validate():
        raise ValidationError("Invalid engine configuration", {"overrides": overrides})
    return resolved


def _same_ball_settings(a: EngineConfig, b: EngineConfig) -> bool:
    return (a.vertex_cap, a.memory_floor_mb) == (b.vertex_cap, b.memory_floor_mb)


def dispatch(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
             configure_logging: bool = False, config: Optional[EngineConfig] = None,
             controller: Optional[GroupController] = None) -> int:
    """Run one command. ``config`` and ``controller`` let a long-lived caller share its
    engine settings and ball cache; an explicit ``--config`` flag still wins."""
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    command = _command_name(args)
    try:
        config = _resolve_config(args, config)
        if configure_logging:
            setup_logging(config.log_level, config.log_file)
        shared = controller if controller is not None and _same_ball_settings(controller.config, config) else None
        ctx = _Context(args, config, shared)
        start = time.time()
        outcome = args.handler(args, ctx)
        text = _render(args, ctx, outcome)
        out.write(text)
        _emit_manifest(args, ctx, text, time.time() - start)
        return outcome.exit_code
    except CayleyWalkError as e:
        out.write(_error_body(command, e))
        return e.exit_code


def main():
    sys.exit(dispatch(configure_logging=True))


if __name__ == "__main__":
    main()
