"""Exogenous noise distributions and deterministic random streams."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

__all__ = [
    "InvalidParamsError",
    "DistributionSpec",
    "uniform_int",
    "uniform",
    "gauss",
    "bernoulli",
    "exponential",
    "draw",
    "RngState",
    "keyed_stream",
]

#: distribution kind -> ordered parameter names
PARAM_NAMES = {
    "uniform_int": ("a", "b"),
    "uniform": ("a", "b"),
    "gauss": ("mu", "sigma"),
    "bernoulli": ("p",),
    "exponential": ("rate",),
}


class InvalidParamsError(ValueError):
    """Distribution parameters violate the kind's constraints."""


@dataclass(frozen=True)
class DistributionSpec:
    """A named distribution with validated parameters."""

    kind: str
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        expected = PARAM_NAMES.get(self.kind)
        if expected is None:
            known = ", ".join(sorted(PARAM_NAMES))
            raise InvalidParamsError(f"unknown distribution kind {self.kind!r} (known: {known})")
        if set(self.params) != set(expected):
            raise InvalidParamsError(
                f"{self.kind} needs parameters {expected}, got {tuple(sorted(self.params))}"
            )
        params = {name: float(self.params[name]) for name in expected}
        object.__setattr__(self, "params", params)
        self._validate(params)

    def _validate(self, p: dict[str, float]) -> None:
        if self.kind == "uniform_int":
            if not (p["a"].is_integer() and p["b"].is_integer()):
                raise InvalidParamsError("uniform_int endpoints must be integers")
            if p["a"] > p["b"]:
                raise InvalidParamsError(f"uniform_int needs a <= b, got a={p['a']}, b={p['b']}")
        elif self.kind == "uniform":
            if p["a"] > p["b"]:
                raise InvalidParamsError(f"uniform needs a <= b, got a={p['a']}, b={p['b']}")
        elif self.kind == "gauss":
            if not p["sigma"] > 0:
                raise InvalidParamsError(f"gauss needs sigma > 0, got {p['sigma']}")
        elif self.kind == "bernoulli":
            if not 0.0 <= p["p"] <= 1.0:
                raise InvalidParamsError(f"bernoulli needs 0 <= p <= 1, got {p['p']}")
        elif self.kind == "exponential":
            if not p["rate"] > 0:
                raise InvalidParamsError(f"exponential needs rate > 0, got {p['rate']}")


def uniform_int(a: int, b: int) -> DistributionSpec:
    """Integers drawn uniformly from {a, ..., b}, both ends inclusive."""
    return DistributionSpec("uniform_int", {"a": a, "b": b})


def uniform(a: float, b: float) -> DistributionSpec:
    """Reals drawn uniformly from [a, b]."""
    return DistributionSpec("uniform", {"a": a, "b": b})


def gauss(mu: float, sigma: float) -> DistributionSpec:
    """Normal distribution with mean mu and standard deviation sigma."""
    return DistributionSpec("gauss", {"mu": mu, "sigma": sigma})


def bernoulli(p: float) -> DistributionSpec:
    """1.0 with probability p, else 0.0."""
    return DistributionSpec("bernoulli", {"p": p})


def exponential(rate: float) -> DistributionSpec:
    """Exponential distribution with the given rate (mean 1/rate)."""
    return DistributionSpec("exponential", {"rate": rate})


class RngState:
    """Seeded deterministic random stream.

    The same seed always yields the same draw sequence.  Streams can be
    split into independent children, so concurrent consumers never share
    state.  All randomness in the package flows through instances of this
    class; nothing touches the global generator.
    """

    __slots__ = ("_rng",)

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def split(self) -> tuple["RngState", "RngState"]:
        """Derive two independent child streams, advancing this one."""
        return RngState(self.draw_key()), RngState(self.draw_key())

    def draw_key(self) -> int:
        """Draw a 64-bit key, advancing the stream."""
        return self._rng.getrandbits(64)

    # raw draws used by the distribution and generator code

    def random(self) -> float:
        return self._rng.random()

    def randint(self, a: int, b: int) -> int:
        return self._rng.randint(a, b)

    def randrange(self, n: int) -> int:
        return self._rng.randrange(n)

    def uniform(self, a: float, b: float) -> float:
        return self._rng.uniform(a, b)

    def gauss(self, mu: float, sigma: float) -> float:
        return self._rng.gauss(mu, sigma)

    def expovariate(self, rate: float) -> float:
        return self._rng.expovariate(rate)

    def shuffle(self, items: list) -> None:
        self._rng.shuffle(items)

    def sample(self, population, k: int) -> list:
        return self._rng.sample(population, k)


def keyed_stream(key: int, label: str) -> RngState:
    """Derive the stream identified by ``label`` under a 64-bit ``key``.

    The mapping is a pure function of (key, label), so streams for distinct
    labels never interfere and adding a label leaves the others unchanged.
    """
    digest = hashlib.blake2b(
        label.encode("utf-8"),
        digest_size=8,
        key=(key & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "big"),
    ).digest()
    return RngState(int.from_bytes(digest, "big"))


def draw(spec: DistributionSpec, rng: RngState) -> float:
    """Draw one value from ``spec``, advancing ``rng``."""
    p = spec.params
    if spec.kind == "uniform_int":
        return float(rng.randint(int(p["a"]), int(p["b"])))
    if spec.kind == "uniform":
        return rng.uniform(p["a"], p["b"])
    if spec.kind == "gauss":
        return rng.gauss(p["mu"], p["sigma"])
    if spec.kind == "bernoulli":
        return 1.0 if rng.random() < p["p"] else 0.0
    if spec.kind == "exponential":
        return rng.expovariate(p["rate"])
    raise TypeError(f"unknown distribution kind {spec.kind!r}")
