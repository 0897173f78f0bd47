"""Canonical on-disk formats for models, graphs, and samples.

All JSON is emitted with sorted keys, shortest round-trip float formatting,
and a trailing newline, so writing the same object twice gives identical
bytes.  Readers validate the document shape and report the offending JSON
path in errors.
"""

from __future__ import annotations

import json

from .distributions import DistributionSpec, InvalidParamsError
from .expr import ParseError, free_variables, parse, to_source
from .graphs import CausalGraph, CycleError, topological_order
from .model import Sample, ScmModel

__all__ = [
    "FORMAT_VERSION",
    "SchemaError",
    "HeterogeneousSamplesError",
    "dumps_canonical",
    "dumps_compact",
    "write_scm",
    "read_scm",
    "write_graph",
    "read_graph",
    "write_samples_csv",
]

FORMAT_VERSION = 1

_IDENT_HINT = "a name matching [A-Za-z_][A-Za-z0-9_]*"


class SchemaError(Exception):
    """A document does not match the expected shape."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        where = path if path else "document"
        super().__init__(f"{where}: {message}")


class HeterogeneousSamplesError(Exception):
    """Samples in one table disagree on their variable set."""


def dumps_canonical(obj) -> str:
    """Canonical human-readable JSON: sorted keys, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def dumps_compact(obj) -> str:
    """Canonical single-line JSON for log records."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# --- models ------------------------------------------------------------------


def write_scm(model: ScmModel, metadata: dict | None = None) -> bytes:
    """Serialize the equations currently in force plus the noise specs.

    Intervention bookkeeping is not part of the format; an intervened model
    is written as the model it currently computes.
    """
    doc = {
        "format_version": FORMAT_VERSION,
        "endogenous": {
            name: {"expr": to_source(model.effective_equation(name))}
            for name in model.endogenous_names
        },
        "exogenous": {
            name: {
                "dist": model.distribution(name).kind,
                "params": dict(model.distribution(name).params),
            }
            for name in model.exogenous_names
        },
    }
    if metadata is not None:
        doc["metadata"] = metadata
    return dumps_canonical(doc).encode("utf-8")


def read_scm(data: bytes | str) -> ScmModel:
    """Parse and validate a model document.

    Raises SchemaError (with the offending JSON path) for shape problems
    and CycleError when the document encodes a cyclic model.
    """
    doc = _loads(data)
    _require(isinstance(doc, dict), "", "expected a JSON object")
    version = doc.get("format_version")
    _require(version == FORMAT_VERSION, "format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    endogenous = doc.get("endogenous")
    _require(isinstance(endogenous, dict), "endogenous", "expected an object")
    exogenous = doc.get("exogenous")
    _require(isinstance(exogenous, dict), "exogenous", "expected an object")
    extra = set(doc) - {"format_version", "endogenous", "exogenous", "metadata"}
    _require(not extra, "", f"unexpected keys: {sorted(extra)}")
    overlap = endogenous.keys() & exogenous.keys()
    _require(not overlap, "endogenous", f"names also declared exogenous: {sorted(overlap)}")

    model = ScmModel()
    for name, entry in exogenous.items():
        path = f"exogenous.{name}"
        _require(isinstance(entry, dict), path, "expected an object")
        _require(set(entry) == {"dist", "params"}, path, "expected keys 'dist' and 'params'")
        _require(isinstance(entry["params"], dict), f"{path}.params", "expected an object")
        try:
            spec = DistributionSpec(entry["dist"], entry["params"])
        except (InvalidParamsError, TypeError) as err:
            raise SchemaError(path, str(err)) from err
        _add_named(model.add_exogenous, name, spec, path)
    declared = set(endogenous) | set(exogenous)
    for name, entry in endogenous.items():
        path = f"endogenous.{name}"
        _require(isinstance(entry, dict), path, "expected an object")
        _require(set(entry) == {"expr"}, path, "expected exactly the key 'expr'")
        source = entry["expr"]
        _require(isinstance(source, str), f"{path}.expr", "expected a string")
        try:
            expr = parse(source)
        except ParseError as err:
            raise SchemaError(f"{path}.expr", str(err)) from err
        for ref in sorted(free_variables(expr)):
            _require(ref in declared, f"{path}.expr", f"references undeclared variable '{ref}'")
        _add_named(model.add_endogenous, name, expr, path)
    return model


def _add_named(add, name, payload, path: str) -> None:
    if not isinstance(name, str):
        raise SchemaError(path, "variable names must be strings")
    try:
        add(name, payload)
    except CycleError:
        raise
    except ValueError as err:
        raise SchemaError(path, str(err)) from err


# --- graphs ------------------------------------------------------------------


def write_graph(graph: CausalGraph) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "endo": list(graph.endo_nodes),
        "exo": list(graph.exo_nodes),
        "edges": sorted([src, dst] for src, dst in graph.edges),
    }
    return dumps_canonical(doc).encode("utf-8")


def read_graph(data: bytes | str) -> CausalGraph:
    doc = _loads(data)
    _require(isinstance(doc, dict), "", "expected a JSON object")
    version = doc.get("format_version")
    _require(version == FORMAT_VERSION, "format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    for key in ("endo", "exo", "edges"):
        _require(isinstance(doc.get(key), list), key, "expected an array")
    endo = doc["endo"]
    exo = doc["exo"]
    names = endo + exo
    _require(all(isinstance(n, str) for n in names), "endo", "node names must be strings")
    _require(len(set(names)) == len(names), "endo", "node names must be distinct")
    edges = []
    endo_set = set(endo)
    for k, pair in enumerate(doc["edges"]):
        path = f"edges[{k}]"
        _require(isinstance(pair, list) and len(pair) == 2, path, "expected a [source, target] pair")
        src, dst = pair
        _require(src in set(names), path, f"unknown node {src!r}")
        _require(dst in endo_set, path, f"edge target {dst!r} must be endogenous")
        edges.append((src, dst))
    topological_order(names, edges)
    return CausalGraph(tuple(endo), tuple(exo), frozenset(edges))


# --- sample tables -----------------------------------------------------------


def write_samples_csv(samples: list[Sample], endogenous, exogenous) -> bytes:
    """Render samples as CSV, one row per sample.

    Columns are the endogenous names in lexicographic order followed by the
    exogenous names in lexicographic order.  Values use shortest round-trip
    formatting and rows end with a bare newline, so equal tables are equal
    bytes.  An empty sample list yields a header-only file.
    """
    header = sorted(endogenous) + sorted(exogenous)
    columns = set(header)
    if len(header) != len(columns):
        raise ValueError("endogenous and exogenous names overlap")
    lines = [",".join(header)]
    for k, sample in enumerate(samples):
        if set(sample) != columns:
            raise HeterogeneousSamplesError(
                f"sample {k} has variables {sorted(sample)}, expected {header}"
            )
        lines.append(",".join(repr(float(sample[name])) for name in header))
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- helpers -----------------------------------------------------------------


def _loads(data: bytes | str):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except ValueError as err:
        raise SchemaError("", f"invalid JSON: {err}") from err


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise SchemaError(path, message)
