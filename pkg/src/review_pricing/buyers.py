"""Buyer purchase models.

A buyer only ever sees the reviews left by earlier buyers of its own type
(summarised as a count and a sum), the round index and, for the benchmark
buyer, its own ex-ante value.
"""

from __future__ import annotations

import math
from typing import Sequence

from sklearn.base import BaseEstimator

from ._validation import check_eta

BUYER_KINDS = ("exact_lb", "lb_plus_slack", "omniscient", "section5")


def _hoeffding_lb(n: int, total: float, log_term: float) -> float:
    if n == 0:
        return 0.0
    return max(0.0, total / n - math.sqrt(log_term / (2 * n)))


def compute_lb(reviews: Sequence[float], t: int, eta: float) -> float:
    """Lower confidence bound on a buyer's ex-ante value from same-type reviews.

    Returns 0 with no reviews, else ``max(0, mean - sqrt(ln(t / eta) / (2 n)))``.
    """
    if t < 1:
        raise ValueError(f"round index must be >= 1, got {t}")
    eta = check_eta(eta)
    return _hoeffding_lb(len(reviews), math.fsum(reviews), math.log(t / eta))


def decide_purchase(tau: float, price: float) -> int:
    """1 if the price is at most the threshold (boundary inclusive)."""
    return 1 if price <= tau else 0


class BuyerModel(BaseEstimator):
    """Threshold rule mapping own-type reviews and the round to a reservation price.

    Parameters
    ----------
    kind : {"exact_lb", "lb_plus_slack", "omniscient", "section5"}
        ``exact_lb`` uses the lower confidence bound itself; ``lb_plus_slack``
        adds a non-negative slack (capped at 1); ``omniscient`` knows its
        ex-ante value; ``section5`` uses the round-independent ``ln(1/eta)``
        confidence term of the lower-bound construction.
    eta : float in (0, 1]
    slack : float, default 0
        Only used by ``lb_plus_slack``.
    """

    def __init__(self, kind="exact_lb", eta=0.1, slack=0.0):
        self.kind = kind
        self.eta = eta
        self.slack = slack

    def _check(self):
        if self.kind not in BUYER_KINDS:
            raise ValueError(f"unknown buyer kind {self.kind!r}; expected one of {BUYER_KINDS}")
        check_eta(self.eta)
        if not self.slack >= 0.0:
            raise ValueError(f"slack must be >= 0, got {self.slack}")

    def threshold_from_stats(self, n: int, total: float, t: int, true_theta: float) -> float:
        """Threshold given the count and sum of the buyer's own-type reviews."""
        kind = self.kind
        if kind == "omniscient":
            return float(true_theta)
        if kind == "section5":
            return _hoeffding_lb(n, total, math.log(1.0 / self.eta))
        lb = _hoeffding_lb(n, total, math.log(t / self.eta))
        if kind == "lb_plus_slack":
            return min(1.0, lb + self.slack)
        return lb

    def threshold(self, reviews: Sequence[float], t: int, true_theta: float) -> float:
        self._check()
        if t < 1:
            raise ValueError(f"round index must be >= 1, got {t}")
        return self.threshold_from_stats(len(reviews), math.fsum(reviews), t, true_theta)

    def lower_bound_from_stats(self, n: int, total: float, t: int) -> float:
        """The pessimism floor every threshold must respect."""
        return _hoeffding_lb(n, total, math.log(t / self.eta))


def buyer_threshold(model: BuyerModel, reviews: Sequence[float], t: int, true_theta: float) -> float:
    return model.threshold(reviews, t, true_theta)


def parse_buyer(spec: str, eta: float = 0.1) -> BuyerModel:
    """Build a buyer model from ``"exact_lb"``, ``"lb_plus_slack:<s>"``,
    ``"omniscient"`` or ``"section5"``."""
    name, _, arg = spec.strip().partition(":")
    if name == "lb_plus_slack":
        if not arg:
            raise ValueError("lb_plus_slack needs a slack, e.g. 'lb_plus_slack:0.05'")
        model = BuyerModel("lb_plus_slack", eta=eta, slack=float(arg))
    elif name in ("exact_lb", "omniscient", "section5") and not arg:
        model = BuyerModel(name, eta=eta)
    else:
        raise ValueError(f"cannot parse buyer model {spec!r}")
    model._check()
    return model
