"""Random model generation: turn graphs into fully specified models.

Each endogenous variable gets an equation materialized from a randomly
chosen function class.  The materialized equation mentions exactly the
variable's graph parents, so the generated model's induced graph reproduces
the input graph edge for edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .distributions import DistributionSpec, RngState, gauss
from .expr import BinaryOp, Expr, NumberLiteral, UnaryNeg, VariableRef
from .graphs import CausalGraph, GraphGenConfig, generate_graph, generate_unique_graph_set
from .model import ScmModel

__all__ = [
    "FunctionClass",
    "linear",
    "interaction",
    "ScmGenConfig",
    "materialize_equation",
    "create_from_graph",
    "create_random",
]


@dataclass(frozen=True)
class FunctionClass:
    """A family of structural equations to draw from.

    ``linear`` builds a weighted sum of the parents plus a fixed bias;
    weight magnitudes are drawn uniformly from [weight_low, weight_high]
    with a uniformly random sign, so weights are never zero.  ``interaction``
    adds all parents and the product of two randomly chosen distinct
    parents; with fewer than two parents it falls back to the plain sum.
    """

    kind: str
    weight_low: float = 0.5
    weight_high: float = 2.0
    bias: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "interaction"):
            raise ValueError(f"unknown function class {self.kind!r}")
        if self.kind == "linear" and not 0.0 < self.weight_low <= self.weight_high:
            raise ValueError(
                f"need 0 < weight_low <= weight_high, got [{self.weight_low}, {self.weight_high}]"
            )


def linear(weight_low: float = 0.5, weight_high: float = 2.0, bias: float = 0.0) -> FunctionClass:
    return FunctionClass("linear", weight_low, weight_high, bias)


def interaction() -> FunctionClass:
    return FunctionClass("interaction")


@dataclass(frozen=True)
class ScmGenConfig:
    """Knobs for random model generation."""

    graph: GraphGenConfig
    function_classes: tuple[FunctionClass, ...] = (linear(), interaction())
    exo_spec: DistributionSpec = field(default_factory=lambda: gauss(0.0, 1.0))
    unique_graphs: bool = False

    def __post_init__(self):
        object.__setattr__(self, "function_classes", tuple(self.function_classes))
        if not self.function_classes:
            raise ValueError("need at least one function class")


def _constant(value: float) -> Expr:
    if value < 0:
        return UnaryNeg(NumberLiteral(-value))
    return NumberLiteral(value)


def _sum(terms: list[Expr]) -> Expr:
    acc = terms[0]
    for term in terms[1:]:
        acc = BinaryOp("add", acc, term)
    return acc


def materialize_equation(fclass: FunctionClass, parents: list[str], rng: RngState) -> Expr:
    """Draw a concrete equation over ``parents`` from ``fclass``.

    With no parents the result is the constant bias (linear) or 0
    (interaction).
    """
    if fclass.kind == "linear":
        terms: list[Expr] = []
        for parent in parents:
            magnitude = rng.uniform(fclass.weight_low, fclass.weight_high)
            negative = rng.random() < 0.5
            weight = _constant(-magnitude if negative else magnitude)
            terms.append(BinaryOp("mul", weight, VariableRef(parent)))
        terms.append(_constant(fclass.bias))
        if len(terms) == 1:
            return terms[0]
        return _sum(terms)
    if not parents:
        return NumberLiteral(0.0)
    terms = [VariableRef(p) for p in parents]
    if len(parents) >= 2:
        i, j = sorted(rng.sample(range(len(parents)), 2))
        terms.append(BinaryOp("mul", VariableRef(parents[i]), VariableRef(parents[j])))
    return _sum(terms)


def create_from_graph(graph: CausalGraph, config: ScmGenConfig, rng: RngState) -> ScmModel:
    """Materialize a model over ``graph``.

    Every exogenous node gets ``config.exo_spec``; every endogenous node
    gets an equation from a function class chosen uniformly at random.  The
    returned model's induced graph equals ``graph`` exactly.
    """
    model = ScmModel()
    for u in graph.exo_nodes:
        model.add_exogenous(u, config.exo_spec)
    for x in graph.endo_nodes:
        fclass = config.function_classes[rng.randrange(len(config.function_classes))]
        model.add_endogenous(x, materialize_equation(fclass, graph.parents(x), rng))
    model.validate()
    return model


def create_random(count: int, config: ScmGenConfig, rng: RngState) -> list[ScmModel]:
    """Generate ``count`` random models from ``config.graph``.

    With ``config.unique_graphs`` set the underlying graphs are pairwise
    distinct (and ExhaustedRetriesError propagates when that is impossible);
    otherwise graphs may repeat.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if config.unique_graphs:
        graphs = generate_unique_graph_set(config.graph, count, rng)
    else:
        graphs = [generate_graph(config.graph, rng) for _ in range(count)]
    return [create_from_graph(g, config, rng) for g in graphs]
