"""Problem instances, ex-post value distributions, the review log and the
analytic revenue benchmark.

Type indices are 0-based throughout and follow the seller's ordering
``theta[0] <= theta[1] <= ... <= theta[d - 1]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._validation import (
    PROB_TOL,
    check_positive_int,
    check_probability_vector,
    check_theta,
    check_type_index,
    check_type_subset,
    check_unit_interval,
)

DIST_KINDS = ("bernoulli", "uniform", "point")


@dataclass(frozen=True)
class ExPostDistribution:
    """A distribution on [0, 1] with an exactly known mean.

    Use the ``bernoulli``, ``uniform`` and ``point`` constructors rather than
    building the tuple of parameters by hand.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in DIST_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {DIST_KINDS}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if self.kind == "uniform":
            if len(params) != 2:
                raise ValueError("uniform takes (lo, hi)")
            lo, hi = params
            check_unit_interval(lo, "lo")
            check_unit_interval(hi, "hi")
            if lo > hi:
                raise ValueError(f"uniform requires lo <= hi, got ({lo}, {hi})")
        else:
            if len(params) != 1:
                raise ValueError(f"{self.kind} takes a single parameter")
            check_unit_interval(params[0], "mean" if self.kind == "bernoulli" else "mass")

    @classmethod
    def bernoulli(cls, mean: float) -> "ExPostDistribution":
        return cls("bernoulli", (mean,))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ExPostDistribution":
        return cls("uniform", (lo, hi))

    @classmethod
    def point(cls, mass: float) -> "ExPostDistribution":
        return cls("point", (mass,))

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            lo, hi = self.params
            return (lo + hi) / 2.0
        return self.params[0]

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return self.params
        if self.kind == "bernoulli":
            m = self.params[0]
            return (0.0 if m < 1.0 else 1.0, 1.0 if m > 0.0 else 0.0)
        return (self.params[0], self.params[0])

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "bernoulli":
            if size is None:
                return float(rng.random() < self.params[0])
            return (rng.random(size) < self.params[0]).astype(float)
        if self.kind == "uniform":
            lo, hi = self.params
            return rng.uniform(lo, hi, size)
        if size is None:
            return self.params[0]
        return np.full(size, self.params[0])

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "params": {"lo": self.params[0], "hi": self.params[1]}}
        key = "mean" if self.kind == "bernoulli" else "mass"
        return {"kind": self.kind, "params": {key: self.params[0]}}

    @classmethod
    def from_dict(cls, data: dict) -> "ExPostDistribution":
        kind = data["kind"]
        params = data.get("params", {})
        if kind == "uniform":
            return cls.uniform(params["lo"], params["hi"])
        if kind == "bernoulli":
            return cls.bernoulli(params["mean"])
        if kind == "point":
            return cls.point(params["mass"])
        raise ValueError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class ProblemInstance:
    """Types, ex-ante values, type probabilities and ex-post distributions.

    Immutable once built, so a single instance can be shared between runs.
    """

    theta: tuple[float, ...]
    q: tuple[float, ...]
    value_dists: tuple[ExPostDistribution, ...]
    horizon_T: int

    def __post_init__(self):
        theta = check_theta(self.theta)
        d = theta.size
        q = check_probability_vector(self.q, d)
        dists = tuple(self.value_dists)
        if len(dists) != d:
            raise ValueError(f"need {d} ex-post distributions, got {len(dists)}")
        for i, (dist, th) in enumerate(zip(dists, theta)):
            if not isinstance(dist, ExPostDistribution):
                raise TypeError(f"value_dists[{i}] is not an ExPostDistribution")
            if abs(dist.mean - th) > PROB_TOL:
                raise ValueError(
                    f"ex-post distribution of type {i} has mean {dist.mean!r}, expected theta={th!r}"
                )
        object.__setattr__(self, "theta", tuple(float(x) for x in theta))
        object.__setattr__(self, "q", tuple(float(x) for x in q))
        object.__setattr__(self, "value_dists", dists)
        object.__setattr__(self, "horizon_T", check_positive_int(self.horizon_T, "horizon_T"))

    @property
    def d(self) -> int:
        return len(self.theta)

    @property
    def q_min(self) -> float:
        return min(self.q)

    def with_horizon(self, T: int) -> "ProblemInstance":
        return replace(self, horizon_T=T)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "horizon_T": self.horizon_T,
            "theta": list(self.theta),
            "q": list(self.q),
            "value_dists": [dist.to_dict() for dist in self.value_dists],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        inst = cls(
            theta=tuple(data["theta"]),
            q=tuple(data["q"]),
            value_dists=tuple(ExPostDistribution.from_dict(x) for x in data["value_dists"]),
            horizon_T=data["horizon_T"],
        )
        if "d" in data and int(data["d"]) != inst.d:
            raise ValueError(f"instance declares d={data['d']} but lists {inst.d} types")
        return inst

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class ReviewLog:
    """Append-only record of ``(type, ex-post value)`` reviews.

    Keeps a running count and sum per type so buyers and sellers can read
    the summary statistics of one type's reviews in O(1).
    """

    d: int
    entries: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self):
        self.counts = [0] * self.d
        self.sums = [0.0] * self.d
        for i, v in list(self.entries):
            self._add(i, v)

    def _add(self, i: int, v: float) -> None:
        self.counts[i] += 1
        self.sums[i] += v

    def append(self, i: int, v: float) -> None:
        check_type_index(i, self.d)
        v = float(v)
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"review value {v} outside [0, 1]")
        self.entries.append((i, v))
        self._add(i, v)

    def record(self, i: int, v: float) -> None:
        """Unchecked append for the simulation hot loop."""
        self.entries.append((i, v))
        self.counts[i] += 1
        self.sums[i] += v

    def __len__(self) -> int:
        return len(self.entries)

    def values(self, i: int) -> list[float]:
        """All review values left by type ``i``, in arrival order."""
        return [v for j, v in self.entries if j == i]

    def count(self, i: int) -> int:
        return self.counts[i]

    def total(self, i: int) -> float:
        return self.sums[i]

    def consistent(self, tol: float = 1e-9) -> bool:
        fresh = ReviewLog(self.d)
        for i, v in self.entries:
            fresh._add(i, v)
        return fresh.counts == self.counts and all(
            abs(a - b) <= tol for a, b in zip(fresh.sums, self.sums)
        )


def sample_type(instance: ProblemInstance, rng: np.random.Generator, size=None):
    """Draw buyer type(s) from the type distribution."""
    out = rng.choice(instance.d, size=size, p=np.asarray(instance.q))
    return int(out) if size is None else out


def sample_ex_post(instance: ProblemInstance, i: int, rng: np.random.Generator, size=None):
    i = check_type_index(i, instance.d)
    return instance.value_dists[i].sample(rng, size)


def rev(p: float, Q: Iterable[int] | None, instance: ProblemInstance) -> float:
    """Expected per-round revenue of price ``p`` counting only types in ``Q``.

    ``Q=None`` means every type.
    """
    Q = check_type_subset(Q, instance.d)
    mass = math.fsum(instance.q[i] for i in Q if instance.theta[i] >= p)
    return p * mass


def optimal_price(instance: ProblemInstance, Q: Sequence[int] | None = None) -> tuple[float, int]:
    """Revenue-maximising price over ``Q`` and the type whose value it equals.

    Only the candidate prices ``theta[i], i in Q`` are evaluated; ties go to
    the larger price, then the larger index.
    """
    Q = check_type_subset(Q, instance.d)
    if not Q:
        raise ValueError("optimal_price needs a non-empty type set")
    best = max(Q, key=lambda i: (rev(instance.theta[i], Q, instance), instance.theta[i], i))
    return instance.theta[best], best


def benchmark_revenue(instance: ProblemInstance) -> float:
    """Per-round revenue of the best fixed price against fully informed buyers."""
    p_star, _ = optimal_price(instance)
    return rev(p_star, None, instance)
