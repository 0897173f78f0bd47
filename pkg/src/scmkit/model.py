"""Structural causal models: equations, interventions, ancestral sampling.

A model pairs endogenous variables, each defined by a structural equation
over other variables, with exogenous variables, each defined by a noise
distribution.  Sampling draws the exogenous noise first and then evaluates
the endogenous equations in dependency order.  Do-interventions replace
equations atomically and reversibly, which is what environments rely on to
keep the wrapped model unchanged across steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .distributions import DistributionSpec, RngState, draw, keyed_stream
from .expr import DomainError, Expr, evaluate, free_variables, parse
from .graphs import CausalGraph, CycleError, topological_order

__all__ = [
    "DuplicateNameError",
    "UnknownTargetError",
    "UndeclaredVariableError",
    "Intervention",
    "Sample",
    "ScmModel",
]

#: one draw of the full model: variable name -> value
Sample = dict[str, float]


class DuplicateNameError(ValueError):
    """A variable name is already taken, or a target was listed twice."""


class UnknownTargetError(KeyError):
    """An intervention targets a variable that is not endogenous."""

    def __init__(self, target: str):
        self.target = target
        super().__init__(target)

    def __str__(self):
        return f"unknown intervention target '{self.target}'"


class UndeclaredVariableError(Exception):
    """An equation references a name that is not a declared variable."""

    def __init__(self, name: str, owner: str):
        self.name = name
        self.owner = owner
        super().__init__(f"equation for '{owner}' references undeclared variable '{name}'")


@dataclass(frozen=True)
class Intervention:
    """Replace the equation of ``target`` with ``equation``.

    The replacement may reference any other variable, endogenous or
    exogenous, but not the target itself.
    """

    target: str
    equation: Expr

    def __post_init__(self):
        if isinstance(self.equation, str):
            object.__setattr__(self, "equation", parse(self.equation))
        if self.target in free_variables(self.equation):
            raise CycleError([self.target])


def _as_intervention(item: Union[Intervention, tuple]) -> Intervention:
    if isinstance(item, Intervention):
        return item
    target, equation = item
    return Intervention(target, equation)


class ScmModel:
    """A structural causal model built up variable by variable.

    Equations may be given as expression trees or as source strings like
    ``"U + 5"``.  Forward references are allowed while building; they are
    checked when the model is sampled or validated.  Example:

        model = ScmModel()
        model.add_endogenous("A", "U + 5")
        model.add_exogenous("U", uniform_int(3, 8))
        model.add_endogenous("Effect", "A * 2")
        values = model.sample(RngState(7))
    """

    def __init__(self):
        self._equations: dict[str, Expr] = {}
        self._dists: dict[str, DistributionSpec] = {}
        self._active: dict[str, Expr] = {}
        self._order: list[str] | None = None

    # --- construction ---

    def add_endogenous(self, name: str, equation: Union[str, Expr]) -> None:
        """Declare endogenous ``name`` with a structural equation.

        Raises DuplicateNameError if the name is taken and CycleError if the
        equation would close a dependency cycle.
        """
        self._check_fresh(name)
        expr = parse(equation) if isinstance(equation, str) else equation
        self._check_acyclic({**self._effective(), name: expr})
        self._equations[name] = expr
        self._order = None

    def add_exogenous(self, name: str, spec: DistributionSpec) -> None:
        """Declare exogenous ``name`` with a noise distribution."""
        self._check_fresh(name)
        self._dists[name] = spec
        self._order = None

    def _check_fresh(self, name: str) -> None:
        if name in self._equations or name in self._dists:
            raise DuplicateNameError(f"variable '{name}' already declared")

    # --- interventions ---

    def do_interventions(self, interventions: Iterable[Union[Intervention, tuple]]) -> None:
        """Apply a set of do-interventions atomically.

        Targets must be distinct endogenous variables and the replacement
        equations may only use declared names.  If the combined replacement
        would create a cycle, CycleError is raised and the model is left
        untouched.  Applying a new intervention to an already intervened
        target replaces it; the original equation stays saved for undo.
        """
        batch = [_as_intervention(item) for item in interventions]
        targets = [iv.target for iv in batch]
        if len(set(targets)) != len(targets):
            dup = sorted({t for t in targets if targets.count(t) > 1})
            raise DuplicateNameError(f"duplicate intervention target(s): {', '.join(dup)}")
        declared = self._equations.keys() | self._dists.keys()
        for iv in batch:
            if iv.target not in self._equations:
                raise UnknownTargetError(iv.target)
            for ref in sorted(free_variables(iv.equation)):
                if ref not in declared:
                    raise UndeclaredVariableError(ref, iv.target)
        candidate = self._effective()
        candidate.update({iv.target: iv.equation for iv in batch})
        self._check_acyclic(candidate)
        for iv in batch:
            self._active[iv.target] = iv.equation
        self._order = None

    def undo_interventions(self) -> None:
        """Restore every intervened variable to its original equation."""
        self._active.clear()
        self._order = None

    @property
    def active_interventions(self) -> dict[str, Expr]:
        return dict(self._active)

    # --- inspection ---

    @property
    def endogenous_names(self) -> list[str]:
        return list(self._equations)

    @property
    def exogenous_names(self) -> list[str]:
        return list(self._dists)

    def base_equation(self, name: str) -> Expr:
        """The structural equation as originally declared."""
        return self._equations[name]

    def effective_equation(self, name: str) -> Expr:
        """The equation currently in force (interventions win)."""
        if name in self._active:
            return self._active[name]
        return self._equations[name]

    def distribution(self, name: str) -> DistributionSpec:
        return self._dists[name]

    def effective_graph(self) -> CausalGraph:
        """The graph induced by the equations currently in force."""
        self.validate()
        edges = frozenset(
            (ref, name)
            for name, expr in self._effective().items()
            for ref in free_variables(expr)
        )
        return CausalGraph(tuple(self._equations), tuple(self._dists), edges)

    def validate(self) -> None:
        """Check that every referenced name is declared and no cycle exists."""
        declared = self._equations.keys() | self._dists.keys()
        effective = self._effective()
        for name, expr in effective.items():
            for ref in sorted(free_variables(expr)):
                if ref not in declared:
                    raise UndeclaredVariableError(ref, name)
        self._check_acyclic(effective)

    # --- sampling ---

    def sample(self, rng: RngState) -> Sample:
        """Draw one joint sample of all variables, advancing ``rng``.

        Each exogenous variable draws from its own substream keyed by the
        variable's name, so its marginal never depends on which other
        variables or interventions are present.  Endogenous variables are
        then evaluated in topological order.
        """
        order = self._topo_order()
        nonce = rng.draw_key()
        values: Sample = {}
        for name in sorted(self._dists):
            values[name] = draw(self._dists[name], keyed_stream(nonce, name))
        for name in order:
            try:
                values[name] = evaluate(self.effective_equation(name), values)
            except DomainError as err:
                raise DomainError(f"while computing '{name}': {err}") from err
        return values

    def sample_many(self, rng: RngState, n: int) -> list[Sample]:
        """Draw ``n`` independent samples."""
        return [self.sample(rng) for _ in range(n)]

    # --- internals ---

    def _effective(self) -> dict[str, Expr]:
        return {name: self.effective_equation(name) for name in self._equations}

    def _check_acyclic(self, equations: dict[str, Expr]) -> None:
        edges = [
            (ref, name) for name, expr in equations.items() for ref in free_variables(expr)
        ]
        topological_order(list(equations) + list(self._dists), edges)

    def _topo_order(self) -> list[str]:
        if self._order is None:
            self.validate()
            edges = [
                (ref, name)
                for name, expr in self._effective().items()
                for ref in free_variables(expr)
                if ref in self._equations
            ]
            self._order = topological_order(self._equations, edges)
        return self._order

    # --- value semantics ---

    def copy(self) -> "ScmModel":
        dup = ScmModel()
        dup._equations = dict(self._equations)
        dup._dists = dict(self._dists)
        dup._active = dict(self._active)
        return dup

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScmModel):
            return NotImplemented
        return (
            self._equations == other._equations
            and self._dists == other._dists
            and self._active == other._active
        )

    def __repr__(self):
        return (
            f"ScmModel({len(self._equations)} endogenous, {len(self._dists)} exogenous, "
            f"{len(self._active)} intervened)"
        )
