"""Toolkit for generating, intervening on, and benchmarking structural causal models."""

__version__ = "0.1.0"

from .distributions import (
    DistributionSpec,
    InvalidParamsError,
    RngState,
    bernoulli,
    draw,
    exponential,
    gauss,
    keyed_stream,
    uniform,
    uniform_int,
)
from .environment import EnvHooks, InvalidActionError, ScmEnvironment, StepResult
from .evaluation import (
    AdjacencyMatrix,
    DimensionMismatchError,
    InsufficientDataError,
    StructureMetrics,
    UseCaseConfig,
    compare_structures,
    corr_threshold_discovery,
    graph_adjacency,
    metrics_table,
    run_usecase,
)
from .expr import (
    BinaryOp,
    DomainError,
    EvalError,
    Expr,
    FunctionCall,
    NumberLiteral,
    ParseError,
    UnaryNeg,
    UnboundVariableError,
    VariableRef,
    evaluate,
    free_variables,
    parse,
    to_source,
)
from .generate import (
    FunctionClass,
    ScmGenConfig,
    create_from_graph,
    create_random,
    interaction,
    linear,
    materialize_equation,
)
from .graphs import (
    CausalGraph,
    CycleError,
    ExhaustedRetriesError,
    GraphGenConfig,
    generate_graph,
    generate_unique_graph_set,
    is_confounded,
    topological_order,
)
from .model import (
    DuplicateNameError,
    Intervention,
    Sample,
    ScmModel,
    UndeclaredVariableError,
    UnknownTargetError,
)
from .serde import (
    HeterogeneousSamplesError,
    SchemaError,
    read_graph,
    read_scm,
    write_graph,
    write_samples_csv,
    write_scm,
)
