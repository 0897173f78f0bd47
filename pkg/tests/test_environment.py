"""Environment step/reset contract tests."""

from __future__ import annotations

import itertools

import pytest

from scmkit.distributions import RngState, uniform_int
from scmkit.environment import EnvHooks, InvalidActionError, ScmEnvironment, StepResult
from scmkit.model import Intervention, ScmModel, UnknownTargetError


def chain_model() -> ScmModel:
    model = ScmModel()
    model.add_endogenous("A", "U + 5")
    model.add_exogenous("U", uniform_int(3, 8))
    model.add_endogenous("Effect", "A * 2")
    return model


MENU = [("A", "5"), ("Effect", "A + 1")]


def make_env(**kwargs) -> ScmEnvironment:
    return ScmEnvironment(chain_model(), MENU, **kwargs)


def test_step_applies_the_chosen_interventions():
    env = make_env(seed=3)
    env.reset()
    r = env.step({1})
    assert r.info["Effect"] == r.info["A"] + 1.0
    r = env.step({0})
    assert r.info["A"] == 5.0
    assert r.info["Effect"] == 10.0
    r = env.step(set())
    assert r.info["Effect"] == 2.0 * r.info["A"]
    r = env.step({0, 1})
    assert r.info["A"] == 5.0
    assert r.info["Effect"] == 6.0


def test_model_is_untouched_by_steps():
    model = chain_model()
    pristine = model.copy()
    env = ScmEnvironment(model, MENU, seed=1)
    env.reset()
    for action in ({}, {0}, {1}, {0, 1}):
        env.step(action)
        assert model == pristine


def test_default_outputs():
    env = make_env(seed=2)
    env.reset()
    r = env.step({0})
    assert isinstance(r, StepResult)
    assert r.reward == 0.0
    assert r.terminated is False
    assert r.truncated is False  # no horizon configured


def test_truncation_at_horizon():
    env = make_env(seed=2, horizon=3)
    env.reset()
    flags = [env.step(set()).truncated for _ in range(3)]
    assert flags == [False, False, True]
    env.reset()
    assert env.step(set()).truncated is False


def test_observation_is_lexicographic_endogenous():
    model = ScmModel()
    model.add_endogenous("B", "2")
    model.add_endogenous("A", "1")
    env = ScmEnvironment(model, [], seed=0)
    obs, info = env.reset()
    assert obs == [1.0, 2.0]  # A before B
    r = env.step(set())
    assert r.observation == [r.info["A"], r.info["B"]]
    assert set(r.info) == {"A", "B"}


def test_info_contains_the_full_sample():
    env = make_env(seed=5)
    env.reset()
    r = env.step({1})
    assert set(r.info) == {"A", "Effect", "U"}


def test_reset_restores_interventions_and_counter():
    model = chain_model()
    env = ScmEnvironment(model, MENU, horizon=2, seed=0)
    model.do_interventions([("A", "7")])
    obs, info = env.reset()
    assert model.active_interventions == {}
    assert info["Effect"] == 2.0 * info["A"]
    assert info["A"] == info["U"] + 5.0
    assert env.step_count == 0


def test_reset_with_seed_replays():
    env = make_env(seed=42)
    first = [env.reset()[1]] + [env.step({1}).info for _ in range(5)]
    env.reset(seed=42)
    second = [env.reset(seed=42)[1]] + [env.step({1}).info for _ in range(5)]
    assert first == second


def test_fixed_seed_and_actions_reproduce_bitwise():
    actions = [{1}, {0}, set(), {0, 1}, {1}]
    runs = []
    for _ in range(2):
        env = make_env(seed=9, horizon=5)
        env.reset()
        runs.append([env.step(a) for a in actions])
    assert runs[0] == runs[1]


def test_invalid_actions():
    env = make_env(seed=0)
    env.reset()
    with pytest.raises(InvalidActionError):
        env.step({2})
    with pytest.raises(InvalidActionError):
        env.step({-1})
    duplicate_target_menu = [("A", "1"), ("A", "2")]
    env2 = ScmEnvironment(chain_model(), duplicate_target_menu, seed=0)
    with pytest.raises(InvalidActionError) as info:
        env2.step({0, 1})
    assert "A" in str(info.value)


def test_duplicate_indices_collapse():
    env = make_env(seed=1)
    env.reset()
    assert env.step([0, 0]).info["A"] == 5.0


def test_action_space_size_matches_enumeration():
    menus = [
        [],
        MENU,
        [("A", "1"), ("A", "2"), ("Effect", "0")],
        [("A", "1"), ("A", "2"), ("A", "3")],
    ]
    for menu in menus:
        env = ScmEnvironment(chain_model(), menu, seed=0)
        targets = [iv.target for iv in env.possible_interventions]
        valid = 0
        for size in range(len(menu) + 1):
            for combo in itertools.combinations(range(len(menu)), size):
                chosen = [targets[i] for i in combo]
                if len(set(chosen)) == len(chosen):
                    valid += 1
        assert env.action_space_size() == valid


def test_hooks_override_defaults():
    hooks = EnvHooks(
        reward_fn=lambda sample, action: sample["Effect"] + len(action),
        terminated_fn=lambda sample: sample["A"] == 5.0,
        truncated_fn=lambda steps: steps >= 2,
        observation_fn=lambda sample: [sample["U"]],
    )
    env = make_env(seed=4, horizon=99, hooks=hooks)
    env.reset()
    r = env.step({0})
    assert r.reward == r.info["Effect"] + 1
    assert r.terminated is True
    assert r.truncated is False
    assert r.observation == [r.info["U"]]
    assert env.step(set()).truncated is True  # hook wins over horizon


def test_menu_is_validated_at_construction():
    with pytest.raises(UnknownTargetError):
        ScmEnvironment(chain_model(), [("Nope", "1")], seed=0)
    with pytest.raises(ValueError):
        make_env(horizon=0)
    model = chain_model()
    env = ScmEnvironment(model, [Intervention("A", "1")], seed=0)
    assert model.active_interventions == {}  # probe rolled back
    assert env.action_space_size() == 2


def test_failed_sampling_rolls_back():
    model = chain_model()
    pristine = model.copy()
    env = ScmEnvironment(model, [("A", "1 / 0")], seed=0)
    env.reset()
    with pytest.raises(Exception):
        env.step({0})
    assert model == pristine
    after = env.step(set()).info
    assert after["A"] == after["U"] + 5.0
