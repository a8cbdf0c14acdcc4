"""Generators for families of problem instances."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_eta, check_positive_int, check_unit_interval
from .market import ExPostDistribution, ProblemInstance

logger = logging.getLogger(__name__)

FAMILIES = ("hard", "easy", "random", "explicit")


def q_threshold(T: int, d: int, eta: float) -> float:
    """``T^(-1/3) (d-1)^(-2/3) ln(1/eta)^(1/3)``: the minimum type probability
    above which regret of order sqrt(T / q_min) is achievable."""
    if d < 2:
        raise ValueError("q_threshold needs d >= 2")
    eta = check_eta(eta)
    return T ** (-1.0 / 3.0) * (d - 1) ** (-2.0 / 3.0) * math.log(1.0 / eta) ** (1.0 / 3.0)


def hard_instance_min_horizon(d: int, eta: float) -> float:
    """Scale ``d ln(1/eta)^2 ln(d)^1.5`` below which the lower bound is not expected
    to bind (no constant is known, so this is only used for a warning)."""
    return d * math.log(1.0 / eta) ** 2 * math.log(d) ** 1.5


def build_hard_instance(T: int, d: int, eta: float) -> ProblemInstance:
    """Equal ex-ante values ``1 - 1/sqrt(T)``, ex-post noise
    ``Uniform(1 - 2/sqrt(T), 1)``, ``d - 1`` rare types of mass ``q`` and one
    common type holding the rest."""
    T = check_positive_int(T, "T")
    if d < 2:
        raise ValueError("the hard instance needs d >= 2")
    if T < 4:
        raise ValueError("the hard instance needs T >= 4 so that values stay in [0, 1]")
    eta = check_eta(eta)
    if eta >= 1.0:
        raise ValueError("the hard instance needs eta < 1")
    q = q_threshold(T, d, eta)
    if q * (d - 1) >= 1.0:
        raise ValueError(
            f"q*(d-1) = {q * (d - 1):.4g} >= 1 for T={T}, d={d}, eta={eta}; increase T"
        )
    if T < hard_instance_min_horizon(d, eta):
        logger.warning(
            "T=%d is below d*ln(1/eta)^2*ln(d)^1.5=%.1f; the lower-bound regime may not apply",
            T,
            hard_instance_min_horizon(d, eta),
        )
    root = math.sqrt(T)
    theta = 1.0 - 1.0 / root
    dist = ExPostDistribution.uniform(1.0 - 2.0 / root, 1.0)
    probs = (q,) * (d - 1) + (1.0 - q * (d - 1),)
    return ProblemInstance(theta=(theta,) * d, q=probs, value_dists=(dist,) * d, horizon_T=T)


def build_easy_instance(d: int, q_min_target: float, theta_gap: float, seed: int, T: int = 1000) -> ProblemInstance:
    """Instance whose smallest type probability is exactly ``q_min_target``.

    One type (chosen by ``seed``) gets ``q_min_target``; the others share
    the remaining mass equally. Values are ``lo + (i + 1) * theta_gap`` with
    ``lo`` drawn from ``[0, 1 - d * theta_gap]``, and reviews are
    Bernoulli(theta_i).
    """
    d = check_positive_int(d, "d")
    q_min_target = check_unit_interval(q_min_target, "q_min_target", open_left=True)
    theta_gap = check_unit_interval(theta_gap, "theta_gap")
    if q_min_target * d > 1.0 + 1e-12:
        raise ValueError(f"q_min_target*d = {q_min_target * d} exceeds 1")
    if theta_gap * d > 1.0 + 1e-12:
        raise ValueError(f"theta_gap*d = {theta_gap * d} exceeds 1")
    rng = np.random.default_rng(seed)
    if d == 1:
        if abs(q_min_target - 1.0) > 1e-12:
            raise ValueError("with a single type q_min_target must be 1")
        q = [1.0]
    else:
        rest = (1.0 - q_min_target) / (d - 1)
        q = [rest] * d
        q[int(rng.integers(d))] = q_min_target
    slack = max(0.0, 1.0 - d * theta_gap)
    lo = float(rng.uniform(0.0, slack)) if slack > 0 else 0.0
    theta = [min(1.0, lo + (i + 1) * theta_gap) for i in range(d)]
    dists = tuple(ExPostDistribution.bernoulli(th) for th in theta)
    return ProblemInstance(theta=tuple(theta), q=tuple(q), value_dists=dists, horizon_T=T)


def build_random_instance(d: int, seed: int, T: int = 1000, noise: str = "mixed") -> ProblemInstance:
    """Random values, Dirichlet(1) type probabilities and ex-post noise of the
    given kind ("mixed" picks one of the three kinds per type)."""
    d = check_positive_int(d, "d")
    kinds = ("bernoulli", "uniform", "point")
    if noise != "mixed" and noise not in kinds:
        raise ValueError(f"noise must be 'mixed' or one of {kinds}, got {noise!r}")
    rng = np.random.default_rng(seed)
    theta = np.sort(rng.uniform(0.0, 1.0, d))
    q = rng.dirichlet(np.ones(d))
    q = q / q.sum()
    dists = []
    for th in theta:
        kind = kinds[int(rng.integers(3))] if noise == "mixed" else noise
        if kind == "bernoulli":
            dists.append(ExPostDistribution.bernoulli(th))
        elif kind == "uniform":
            w = float(rng.uniform()) * min(th, 1.0 - th)
            dists.append(ExPostDistribution.uniform(th - w, th + w))
        else:
            dists.append(ExPostDistribution.point(th))
    return ProblemInstance(
        theta=tuple(theta.tolist()), q=tuple(q.tolist()), value_dists=tuple(dists), horizon_T=T
    )


@dataclass(frozen=True)
class InstanceSpec:
    """A named instance family with its parameters.

    The horizon is supplied at resolution time so one spec can be swept over
    several horizons (the hard family depends on ``T``).
    """

    family: str
    params: dict

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown instance family {self.family!r}; expected one of {FAMILIES}")

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceSpec":
        data = dict(data)
        family = data.pop("family")
        return cls(family, data)

    def resolve(self, T: int, base_dir: Path | None = None) -> ProblemInstance:
        p = self.params
        if self.family == "hard":
            return build_hard_instance(T, int(p["d"]), float(p["eta"]))
        if self.family == "easy":
            return build_easy_instance(
                int(p["d"]), float(p["q_min"]), float(p["gap"]), int(p.get("seed", 0)), T=T
            )
        if self.family == "random":
            return build_random_instance(
                int(p["d"]), int(p.get("seed", 0)), T=T, noise=p.get("noise", "mixed")
            )
        if "instance" in p:
            inst = ProblemInstance.from_dict(p["instance"])
        else:
            path = Path(p["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            inst = ProblemInstance.load(path)
        return inst.with_horizon(T)
