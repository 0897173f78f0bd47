"""Episodic environment wrapping a structural causal model.

Every step applies a chosen subset of a fixed intervention menu, draws one
sample, and rolls the interventions back, so the wrapped model is exactly
the same before and after the step.  Observation, reward, termination, and
truncation can each be customized through hooks; the defaults observe the
endogenous values, give zero reward, never terminate, and truncate once a
fixed horizon is reached.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .distributions import RngState
from .model import Intervention, Sample, ScmModel, _as_intervention

__all__ = ["InvalidActionError", "EnvHooks", "StepResult", "ScmEnvironment"]


class InvalidActionError(Exception):
    """An action referenced unknown interventions or clashing targets."""


@dataclass
class EnvHooks:
    """Optional overrides for the environment's outputs.

    ``reward_fn(sample, action)`` maps the step's sample and the applied
    action to a reward; ``terminated_fn(sample)`` and
    ``truncated_fn(step_count)`` control episode end; ``observation_fn(sample)``
    replaces the default observation vector.
    """

    reward_fn: Optional[Callable[[Sample, tuple[int, ...]], float]] = None
    terminated_fn: Optional[Callable[[Sample], bool]] = None
    truncated_fn: Optional[Callable[[int], bool]] = None
    observation_fn: Optional[Callable[[Sample], list[float]]] = None


@dataclass(frozen=True)
class StepResult:
    observation: list[float]
    reward: float
    terminated: bool
    truncated: bool
    info: Sample


class ScmEnvironment:
    """Step/reset interface over a model with a fixed intervention menu.

    An action is a set of indices into ``possible_interventions``; the
    indexed interventions are applied together for the duration of one
    sample.  The empty action observes the model as-is.
    """

    def __init__(
        self,
        model: ScmModel,
        possible_interventions: Iterable[Union[Intervention, tuple]],
        horizon: int | None = None,
        seed: int = 0,
        hooks: EnvHooks | None = None,
    ):
        if horizon is not None and horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self._model = model
        self._interventions = [_as_intervention(item) for item in possible_interventions]
        for iv in self._interventions:
            model.do_interventions([iv])
            model.undo_interventions()
        self._horizon = horizon
        self._hooks = hooks if hooks is not None else EnvHooks()
        self._endo_order = sorted(model.endogenous_names)
        self._rng = RngState(seed)
        self._steps = 0

    @property
    def model(self) -> ScmModel:
        return self._model

    @property
    def possible_interventions(self) -> list[Intervention]:
        return list(self._interventions)

    @property
    def step_count(self) -> int:
        return self._steps

    def action_space_size(self) -> int:
        """Number of valid actions: subsets with pairwise distinct targets."""
        counts = Counter(iv.target for iv in self._interventions)
        return math.prod(k + 1 for k in counts.values())

    def reset(self, seed: int | None = None) -> tuple[list[float], Sample]:
        """Start a fresh episode and return an observational sample.

        Clears any active interventions, zeroes the step counter, and
        reseeds the stream when ``seed`` is given.
        """
        if seed is not None:
            self._rng = RngState(seed)
        self._model.undo_interventions()
        self._steps = 0
        sample = self._model.sample(self._rng)
        return self._observe(sample), sample

    def step(self, action: Iterable[int]) -> StepResult:
        """Apply the chosen interventions, sample once, and roll back.

        The model is restored to its pre-step state even if sampling fails.
        Raises InvalidActionError for out-of-range indices or two chosen
        interventions sharing a target.
        """
        indices = self._check_action(action)
        self._model.do_interventions([self._interventions[i] for i in indices])
        try:
            sample = self._model.sample(self._rng)
        finally:
            self._model.undo_interventions()
        self._steps += 1
        hooks = self._hooks
        reward = hooks.reward_fn(sample, indices) if hooks.reward_fn else 0.0
        terminated = hooks.terminated_fn(sample) if hooks.terminated_fn else False
        if hooks.truncated_fn:
            truncated = hooks.truncated_fn(self._steps)
        else:
            truncated = self._horizon is not None and self._steps >= self._horizon
        observation = hooks.observation_fn(sample) if hooks.observation_fn else self._observe(sample)
        return StepResult(observation, reward, terminated, truncated, sample)

    def _check_action(self, action: Iterable[int]) -> tuple[int, ...]:
        indices = tuple(sorted(set(action)))
        for i in indices:
            if not isinstance(i, int) or not 0 <= i < len(self._interventions):
                raise InvalidActionError(
                    f"action index {i!r} out of range for {len(self._interventions)} interventions"
                )
        targets = [self._interventions[i].target for i in indices]
        if len(set(targets)) != len(targets):
            dup = sorted({t for t in targets if targets.count(t) > 1})
            raise InvalidActionError(f"action targets {', '.join(dup)} more than once")
        return indices

    def _observe(self, sample: Sample) -> list[float]:
        return [sample[name] for name in self._endo_order]
