"""Seller pricing policies.

Policies follow the scikit-learn parameter convention: constructor
arguments are stored verbatim (so ``get_params``/``set_params``/``clone``
work) and all per-run state is created by :meth:`SellerPolicy.start` as
attributes with a trailing underscore.

Per round the simulator calls ``price(t, reviews)`` before the buyer
arrives and ``observe(t, price, bought, revealed_type)`` afterwards.
``revealed_type`` is ``None`` whenever the buyer did not purchase.
"""

from __future__ import annotations

import math
from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_eta, check_positive_int, check_unit_interval
from .market import ProblemInstance, ReviewLog, optimal_price


def default_lambda(d: int, T: int) -> float:
    """``d^(-2/3) T^(-1/3)``, the tuning that balances the regret terms."""
    return d ** (-2.0 / 3.0) * T ** (-1.0 / 3.0)


def phase1_length(d: int, T: int, lam: float, phase1_constant: float = 32.0) -> int:
    """Number of free rounds used to estimate type frequencies.

    ``ceil(c * ln(d T^2) / lam) + 1``, never more than ``T``.
    """
    d = check_positive_int(d, "d")
    T = check_positive_int(T, "T")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    if phase1_constant < 0:
        raise ValueError("phase1_constant must be >= 0")
    raw = phase1_constant * math.log(d * T * T) / lam
    if raw >= T:
        return T
    return min(T, math.ceil(raw) + 1)


def type_elimination(counts: Sequence[int], t_lambda: int, lam: float) -> tuple[int, ...]:
    """Types seen in at least a ``3 lam / 4`` fraction of the phase-1 rounds."""
    if sum(counts) != t_lambda:
        raise ValueError(f"phase-1 counts sum to {sum(counts)}, expected {t_lambda}")
    # tolerance keeps exact boundary cases (e.g. 15/100 vs 3*0.2/4) inclusive
    cut = 3.0 * lam / 4.0 - 1e-12
    return tuple(i for i, c in enumerate(counts) if c / t_lambda >= cut)


def elimination_cutoff(active: Sequence[int], mu_bar: dict[int, float], rho: float) -> int:
    """Smallest active type whose upper revenue bound reaches the best lower bound."""
    best_lower = max(mu_bar[k] - rho for k in active)
    return next(i for i in active if mu_bar[i] + rho >= best_lower)


class SellerPolicy(BaseEstimator):
    """Common interface; subclasses implement ``_start``, ``price``, ``observe``."""

    def start(self, theta: Sequence[float], horizon: int):
        self.theta_ = tuple(float(x) for x in theta)
        self.d_ = len(self.theta_)
        self.T_ = check_positive_int(horizon, "horizon")
        self._start()
        return self

    def _start(self):
        pass

    def _check_started(self):
        if not hasattr(self, "T_"):
            raise NotFittedError(f"{type(self).__name__} has not been started; call start() first")

    def price(self, t: int, reviews: ReviewLog) -> float:
        raise NotImplementedError

    def observe(self, t: int, price: float, bought: int, revealed_type: int | None):
        return self


class FixedPrice(SellerPolicy):
    """Posts the same price ``p`` every round."""

    def __init__(self, p=0.0):
        self.p = p

    def _start(self):
        self.p_ = check_unit_interval(self.p, "p")

    def price(self, t, reviews):
        return self.p_


class TwoPhasePricing(SellerPolicy):
    """Free-sample type elimination followed by successive elimination of prices.

    Phase 1 posts price 0 for ``t_lambda_`` rounds and keeps the types that
    showed up often enough (``Q_``). Phase 2 maintains an active suffix
    ``S`` of ``Q_`` and posts the smallest of ``theta_i`` and the
    seller-side review bound ``LB_i`` over active types, which every
    pessimistic buyer of an active type accepts. Active types whose revenue
    upper confidence bound falls below the best lower confidence bound are
    dropped.

    Parameters
    ----------
    lam : float or "auto", default "auto"
        Elimination threshold; "auto" means ``d^(-2/3) T^(-1/3)``.
    phase1_constant : float, default 32
    eta : float, default 0.1
        The buyers' pessimism parameter.
    """

    def __init__(self, lam="auto", phase1_constant=32.0, eta=0.1):
        self.lam = lam
        self.phase1_constant = phase1_constant
        self.eta = eta

    def _start(self):
        d, T = self.d_, self.T_
        eta = check_eta(self.eta)
        lam = default_lambda(d, T) if self.lam in ("auto", None) else float(self.lam)
        self.lambda_ = lam
        self.t_lambda_ = phase1_length(d, T, lam, self.phase1_constant)
        self.log_T_eta_ = math.log(T / eta)
        self.log_dT2_ = math.log(d * T * T)
        self.phase1_counts_ = [0] * d
        self.Q_ = None
        self.in_Q_ = [False] * d
        self.S_ = ()
        self.phase2_sum_ = [0] * d
        self.n_phase2_ = 0
        self.rho_ = math.inf
        self.mu_bar_ = {}
        self.i0_ = None
        self.last_active_ = ()

    @property
    def in_phase1(self) -> bool:
        return self.Q_ is None

    def seller_lb(self, i: int, reviews: ReviewLog) -> float:
        n = reviews.counts[i]
        if n == 0:
            return 0.0
        return max(0.0, reviews.sums[i] / n - math.sqrt(self.log_T_eta_ / (2 * n)))

    def price(self, t, reviews):
        if t <= self.t_lambda_:
            return 0.0
        if not self.S_:
            return 1.0
        theta, counts, sums, log_term = self.theta_, reviews.counts, reviews.sums, self.log_T_eta_
        p = 1.0
        for i in self.S_:
            n = counts[i]
            if n == 0:
                return 0.0
            lb = sums[i] / n - math.sqrt(log_term / (2 * n))
            cand = theta[i] if theta[i] < lb else lb
            if cand < p:
                p = cand
        return p if p > 0.0 else 0.0

    def observe(self, t, price, bought, revealed_type):
        if bought and revealed_type is None:
            raise ValueError("a purchase must reveal the buyer's type")
        if t <= self.t_lambda_:
            if not bought:
                raise RuntimeError(f"no purchase at price {price} in phase-1 round {t}")
            self.phase1_counts_[revealed_type] += 1
            if t == self.t_lambda_:
                self._end_phase1()
            return self
        self.n_phase2_ += 1
        S, theta = self.S_, self.theta_
        if bought and self.in_Q_[revealed_type]:
            th = theta[revealed_type]
            for i in S:
                if th >= theta[i]:
                    self.phase2_sum_[i] += 1
        if not S:
            return self
        n2 = self.n_phase2_
        rho = math.sqrt(self.log_dT2_ / (2 * n2))
        mu_bar = {i: theta[i] * self.phase2_sum_[i] / n2 for i in S}
        i0 = elimination_cutoff(S, mu_bar, rho)
        self.rho_ = rho
        self.mu_bar_ = mu_bar
        self.i0_ = i0
        self.last_active_ = S
        if i0 != S[0]:
            self.S_ = S[S.index(i0):]
        return self

    def _end_phase1(self):
        self.Q_ = type_elimination(self.phase1_counts_, self.t_lambda_, self.lambda_)
        self.in_Q_ = [i in self.Q_ for i in range(self.d_)]
        self.S_ = self.Q_

    def revenue_bounds(self) -> dict[int, tuple[float, float]]:
        """``{i: (lower, upper)}`` confidence bounds on the restricted revenue of
        ``theta_i`` for the types active at the latest phase-2 update."""
        return {i: (m - self.rho_, m + self.rho_) for i, m in self.mu_bar_.items()}


def parse_policy(spec: str, instance: ProblemInstance, *, lam="auto", phase1_constant=32.0, eta=0.1):
    """Build a policy from ``"two_phase"``, ``"fixed:<p>"`` or ``"oracle"``.

    The oracle posts the benchmark price of ``instance`` every round.
    """
    name, _, arg = spec.strip().partition(":")
    if name == "two_phase" and not arg:
        return TwoPhasePricing(lam=lam, phase1_constant=phase1_constant, eta=eta)
    if name == "fixed" and arg:
        return FixedPrice(float(arg))
    if name == "oracle" and not arg:
        p_star, _ = optimal_price(instance)
        return FixedPrice(p_star)
    raise ValueError(f"cannot parse policy {spec!r}")


def baseline_fixed_price(p: float) -> FixedPrice:
    return FixedPrice(p)
