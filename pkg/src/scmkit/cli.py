"""Command-line interface.

Subcommands cover the whole pipeline: generate graphs, turn them into
models, draw samples (optionally under interventions), roll out episodes,
score predicted structures, and run the built-in benchmark.  Every
generating command takes an explicit --seed and writes a manifest with
SHA-256 digests of its outputs, so a rerun with the same arguments
reproduces the same bytes.

Exit codes: 0 success, 2 usage, 3 validation failure (parse errors, schema
violations, cycles), 4 retry exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import os
import sys
import tempfile

from . import __version__
from .distributions import (
    PARAM_NAMES,
    DistributionSpec,
    InvalidParamsError,
    RngState,
    keyed_stream,
)
from .environment import InvalidActionError, ScmEnvironment
from .evaluation import (
    DimensionMismatchError,
    InsufficientDataError,
    UseCaseConfig,
    compare_structures,
    graph_adjacency,
    metrics_table,
    run_usecase,
)
from .expr import DomainError, ParseError, UnboundVariableError
from .generate import FunctionClass, ScmGenConfig, create_from_graph, create_random
from .graphs import CycleError, ExhaustedRetriesError, GraphGenConfig, generate_unique_graph_set
from .model import DuplicateNameError, Intervention, UndeclaredVariableError, UnknownTargetError
from .serde import (
    FORMAT_VERSION,
    HeterogeneousSamplesError,
    SchemaError,
    dumps_canonical,
    dumps_compact,
    read_graph,
    read_scm,
    write_graph,
    write_samples_csv,
    write_scm,
)

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_EXHAUSTED = 4

_VALIDATION_ERRORS = (
    ParseError,
    UnboundVariableError,
    DomainError,
    CycleError,
    SchemaError,
    HeterogeneousSamplesError,
    UnknownTargetError,
    UndeclaredVariableError,
    DuplicateNameError,
    InvalidParamsError,
    InvalidActionError,
    DimensionMismatchError,
    InsufficientDataError,
)


class _UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ExhaustedRetriesError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except _VALIDATION_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scmkit",
        description="Generate, intervene on, sample, and score structural causal models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graphs", help="generate unique random causal graphs")
    _add_graph_flags(p)
    p.add_argument("--count", type=_positive_int, required=True, help="number of graphs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen_graphs)

    p = sub.add_parser("gen-scms", help="generate random models")
    p.add_argument("--from-graphs", help="directory of .graph.json files to materialize")
    _add_graph_flags(p, required=False)
    p.add_argument("--count", type=_positive_int, help="number of models (without --from-graphs)")
    p.add_argument(
        "--functions",
        default="linear,interaction",
        help="comma-separated function classes (linear, interaction)",
    )
    p.add_argument(
        "--exo-dist",
        default="gauss:0,1",
        help="exogenous distribution as kind:param1,param2 (e.g. gauss:0,1)",
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen_scms)

    p = sub.add_parser("sample", help="draw samples from a model")
    p.add_argument("--scm", required=True, help="path to a .scm.json file")
    p.add_argument("--n", type=_nonnegative_int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument(
        "--do",
        action="append",
        default=[],
        metavar="VAR=EXPR",
        help="intervention, e.g. --do 'Effect=A + 1' (repeatable)",
    )
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("env-run", help="roll out environment episodes")
    p.add_argument("--scm", required=True, help="path to a .scm.json file")
    p.add_argument(
        "--interventions",
        required=True,
        help="JSON file: array of {\"target\": ..., \"expr\": ...}",
    )
    p.add_argument("--episodes", type=_positive_int, default=1)
    p.add_argument("--horizon", type=_positive_int, default=10)
    p.add_argument("--policy", choices=("random", "none"), default="random")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="JSONL output path")
    p.set_defaults(func=_cmd_env_run)

    p = sub.add_parser("eval", help="score a predicted graph against a true graph")
    p.add_argument("--pred", required=True, help="predicted .graph.json")
    p.add_argument("--truth", required=True, help="ground-truth .graph.json")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("usecase", help="run the benchmark pipeline")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scm-count", type=_positive_int, default=30)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--n-endo", type=_positive_int, default=4)
    p.add_argument("--n-exo", type=_nonnegative_int, default=4)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=_cmd_usecase)

    return parser


def _add_graph_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--n-endo", type=_positive_int, required=required)
    p.add_argument("--n-exo", type=_nonnegative_int, default=0)
    p.add_argument("--confounders", action="store_true", help="allow multi-child exogenous nodes")
    p.add_argument("--edge-prob", type=float, default=0.5)
    p.add_argument("--confounder-child-prob", type=float, default=0.5)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


# --- subcommands -------------------------------------------------------------


def _cmd_gen_graphs(args) -> int:
    config = _graph_config(args)
    graphs = generate_unique_graph_set(config, args.count, RngState(args.seed))
    os.makedirs(args.out, exist_ok=True)
    outputs = {}
    width = max(3, len(str(args.count - 1)))
    for i, graph in enumerate(graphs):
        outputs[f"graph_{i:0{width}d}.graph.json"] = write_graph(graph)
    _emit(args.out, outputs, _manifest("gen-graphs", args, outputs))
    print(f"wrote {len(graphs)} graphs to {args.out}")
    return 0


def _cmd_gen_scms(args) -> int:
    if args.from_graphs is None and (args.n_endo is None or args.count is None):
        raise _UsageError("need --n-endo and --count (or --from-graphs)")
    rng = RngState(args.seed)
    scm_config = ScmGenConfig(
        graph=_graph_config(args) if args.from_graphs is None else GraphGenConfig(n_endo=1),
        function_classes=_parse_functions(args.functions),
        exo_spec=_parse_dist(args.exo_dist),
    )
    if args.from_graphs is not None:
        names = sorted(n for n in os.listdir(args.from_graphs) if n.endswith(".graph.json"))
        if not names:
            raise _UsageError(f"no .graph.json files in {args.from_graphs}")
        graphs = [read_graph(_read(os.path.join(args.from_graphs, n))) for n in names]
        models = [create_from_graph(g, scm_config, rng) for g in graphs]
    else:
        models = create_random(args.count, scm_config, rng)
    os.makedirs(args.out, exist_ok=True)
    outputs = {}
    width = max(3, len(str(len(models) - 1)))
    for i, model in enumerate(models):
        outputs[f"scm_{i:0{width}d}.scm.json"] = write_scm(model)
    _emit(args.out, outputs, _manifest("gen-scms", args, outputs))
    print(f"wrote {len(models)} models to {args.out}")
    return 0


def _cmd_sample(args) -> int:
    model = read_scm(_read(args.scm))
    interventions = [_parse_do(spec) for spec in args.do]
    if interventions:
        model.do_interventions(interventions)
    samples = model.sample_many(RngState(args.seed), args.n)
    csv = write_samples_csv(samples, model.endogenous_names, model.exogenous_names)
    if args.out is None:
        sys.stdout.write(csv.decode("utf-8"))
    else:
        _write_atomic(args.out, csv)
        print(f"wrote {args.n} samples to {args.out}")
    return 0


def _cmd_env_run(args) -> int:
    model = read_scm(_read(args.scm))
    interventions = _read_interventions(args.interventions)
    env = ScmEnvironment(model, interventions, horizon=args.horizon, seed=args.seed)
    actions = _valid_actions(env)
    policy_rng = keyed_stream(args.seed, "policy")
    lines = []
    for _ in range(args.episodes):
        env.reset()
        for t in range(args.horizon):
            if args.policy == "random":
                action = actions[policy_rng.randrange(len(actions))]
            else:
                action = ()
            result = env.step(action)
            lines.append(
                dumps_compact(
                    {
                        "t": t,
                        "action_indices": list(action),
                        "observation": result.observation,
                        "reward": result.reward,
                        "terminated": result.terminated,
                        "truncated": result.truncated,
                        "sample": result.info,
                    }
                )
            )
            if result.terminated or result.truncated:
                break
    _write_atomic(args.out, ("\n".join(lines) + "\n").encode("utf-8"))
    print(f"wrote {len(lines)} steps to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    predicted = graph_adjacency(read_graph(_read(args.pred)))
    truth = graph_adjacency(read_graph(_read(args.truth)))
    metrics = compare_structures(predicted, truth)
    sys.stdout.write(
        dumps_canonical(
            {
                "tp": metrics.tp,
                "fp": metrics.fp,
                "fn": metrics.fn,
                "tn": metrics.tn,
                "f1": metrics.f1,
                "tpr": metrics.tpr,
            }
        )
    )
    return 0


def _cmd_usecase(args) -> int:
    try:
        config = UseCaseConfig(
            n_endo=args.n_endo,
            n_exo=args.n_exo,
            scm_count=args.scm_count,
            samples_per_scm=args.samples,
            corr_threshold=args.threshold,
        )
    except ValueError as err:
        raise _UsageError(str(err)) from err
    records = run_usecase(config, RngState(args.seed))
    table = metrics_table(records)
    os.makedirs(args.out, exist_ok=True)
    outputs = {
        "metrics.json": dumps_canonical(records).encode("utf-8"),
        "metrics.txt": table.encode("utf-8"),
    }
    _emit(args.out, outputs, _manifest("usecase", args, outputs))
    sys.stdout.write(table)
    return 0


# --- helpers -----------------------------------------------------------------


def _graph_config(args) -> GraphGenConfig:
    try:
        return GraphGenConfig(
            n_endo=args.n_endo,
            n_exo=args.n_exo,
            allow_exo_confounders=args.confounders,
            edge_prob=args.edge_prob,
            confounder_child_prob=args.confounder_child_prob,
        )
    except ValueError as err:
        raise _UsageError(str(err)) from err


def _parse_functions(text: str) -> tuple[FunctionClass, ...]:
    classes = []
    for name in text.split(","):
        name = name.strip()
        if name == "linear":
            classes.append(FunctionClass("linear"))
        elif name == "interaction":
            classes.append(FunctionClass("interaction"))
        else:
            raise _UsageError(f"unknown function class {name!r} (known: linear, interaction)")
    return tuple(classes)


def _parse_dist(text: str) -> DistributionSpec:
    kind, sep, rest = text.partition(":")
    if not sep:
        raise _UsageError(f"expected kind:param1,param2, got {text!r}")
    names = PARAM_NAMES.get(kind)
    if names is None:
        raise _UsageError(f"unknown distribution kind {kind!r} (known: {', '.join(sorted(PARAM_NAMES))})")
    parts = rest.split(",") if rest else []
    if len(parts) != len(names):
        raise _UsageError(f"{kind} takes {len(names)} parameter(s) ({','.join(names)}), got {rest!r}")
    try:
        params = {name: float(part) for name, part in zip(names, parts)}
    except ValueError:
        raise _UsageError(f"non-numeric parameter in {text!r}") from None
    try:
        return DistributionSpec(kind, params)
    except InvalidParamsError as err:
        raise _UsageError(str(err)) from err


def _parse_do(spec: str) -> Intervention:
    target, sep, source = spec.partition("=")
    target = target.strip()
    if not sep or not target:
        raise _UsageError(f"expected VAR=EXPR, got {spec!r}")
    return Intervention(target, source)


def _read_interventions(path: str) -> list[Intervention]:
    import json

    try:
        doc = json.loads(_read(path).decode("utf-8"))
    except ValueError as err:
        raise SchemaError("", f"invalid JSON: {err}") from err
    if not isinstance(doc, list):
        raise SchemaError("", "expected an array of interventions")
    interventions = []
    for k, entry in enumerate(doc):
        if not isinstance(entry, dict) or set(entry) != {"target", "expr"}:
            raise SchemaError(f"[{k}]", "expected an object with keys 'target' and 'expr'")
        interventions.append(Intervention(entry["target"], entry["expr"]))
    return interventions


def _valid_actions(env: ScmEnvironment) -> list[tuple[int, ...]]:
    indices = range(len(env.possible_interventions))
    targets = [iv.target for iv in env.possible_interventions]
    actions = []
    for size in range(len(targets) + 1):
        for combo in itertools.combinations(indices, size):
            chosen = [targets[i] for i in combo]
            if len(set(chosen)) == len(chosen):
                actions.append(combo)
    return actions


def _manifest(command: str, args, outputs: dict[str, bytes]) -> bytes:
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command", "seed", "out") and value is not None
    }
    doc = {
        "command": command,
        "config": config,
        "format_version": FORMAT_VERSION,
        "outputs": {name: hashlib.sha256(data).hexdigest() for name, data in outputs.items()},
        "seed": args.seed,
        "tool_version": __version__,
    }
    return dumps_canonical(doc).encode("utf-8")


def _emit(out_dir: str, outputs: dict[str, bytes], manifest: bytes) -> None:
    for name, data in outputs.items():
        _write_atomic(os.path.join(out_dir, name), data)
    _write_atomic(os.path.join(out_dir, "manifest.json"), manifest)


def _write_atomic(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _read(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


if __name__ == "__main__":
    sys.exit(main())
