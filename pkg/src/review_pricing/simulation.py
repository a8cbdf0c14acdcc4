"""Round-by-round market simulation and regret accounting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import clone

from .buyers import BuyerModel
from .market import ProblemInstance, ReviewLog, benchmark_revenue, sample_type
from .sellers import SellerPolicy

TRACE_HEADER = ("t", "price", "type", "threshold", "bought", "revenue", "review")

# observer(t, policy, price, buyer_type, threshold, bought); called before the
# policy sees the outcome, so policy state still reflects round t.
Observer = Callable[[int, SellerPolicy, float, int, float, int], None]


@dataclass
class RunTrace:
    """Per-round record of one episode plus its revenue and regret.

    ``review`` holds NaN on rounds without a purchase.
    """

    price: np.ndarray
    type: np.ndarray
    threshold: np.ndarray
    bought: np.ndarray
    revenue: np.ndarray
    review: np.ndarray
    total_revenue: float
    benchmark_per_round: float
    regret: float
    seed: int | None = None
    policy: SellerPolicy | None = None
    reviews: ReviewLog | None = None

    @property
    def T(self) -> int:
        return len(self.price)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    def to_csv(self, path_or_buf=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for k in range(self.T):
            review = "" if not self.bought[k] else repr(float(self.review[k]))
            writer.writerow(
                (
                    k + 1,
                    repr(float(self.price[k])),
                    int(self.type[k]),
                    repr(float(self.threshold[k])),
                    int(self.bought[k]),
                    repr(float(self.revenue[k])),
                    review,
                )
            )
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return None


def episode_streams(seed: int, d: int) -> tuple[np.random.Generator, list[np.random.Generator]]:
    """Independent generators for the type sequence and for each type's
    ex-post values, all derived from one episode seed."""
    type_ss, value_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(type_ss), [np.random.default_rng(s) for s in value_ss.spawn(d)]


def run_episode(
    instance: ProblemInstance,
    policy: SellerPolicy,
    buyer: BuyerModel,
    seed: int,
    observer: Observer | None = None,
) -> RunTrace:
    """Simulate ``instance.horizon_T`` rounds of posted pricing.

    Types are drawn up front from their own stream and each type's ex-post
    values are read in order from a per-type stream, so the type sequence
    and the value of the k-th review of each type do not depend on the
    seller's prices.
    """
    buyer._check()
    T, d = instance.horizon_T, instance.d
    theta = instance.theta
    policy = clone(policy).start(theta, T)

    type_rng, value_rngs = episode_streams(seed, d)
    types = sample_type(instance, type_rng, size=T).tolist()
    tapes = [
        np.atleast_1d(instance.value_dists[i].sample(value_rngs[i], size=T)).tolist()
        for i in range(d)
    ]

    log = ReviewLog(d)
    counts, sums = log.counts, log.sums
    prices = [0.0] * T
    taus = [0.0] * T
    boughts = [0] * T
    values = [math.nan] * T
    threshold = buyer.threshold_from_stats
    price_of = policy.price
    observe = policy.observe

    for k in range(T):
        t = k + 1
        p = price_of(t, log)
        i = types[k]
        tau = threshold(counts[i], sums[i], t, theta[i])
        b = 1 if p <= tau else 0
        prices[k] = p
        taus[k] = tau
        if observer is not None:
            observer(t, policy, p, i, tau, b)
        if b:
            boughts[k] = 1
            v = tapes[i][counts[i]]
            values[k] = v
            log.record(i, v)
            observe(t, p, 1, i)
        else:
            observe(t, p, 0, None)

    price_arr = np.asarray(prices)
    bought_arr = np.asarray(boughts, dtype=np.int8)
    revenue = price_arr * bought_arr
    total = math.fsum(revenue.tolist())
    bench = benchmark_revenue(instance)
    return RunTrace(
        price=price_arr,
        type=np.asarray(types, dtype=np.int64),
        threshold=np.asarray(taus),
        bought=bought_arr,
        revenue=revenue,
        review=np.asarray(values),
        total_revenue=total,
        benchmark_per_round=bench,
        regret=T * bench - total,
        seed=seed,
        policy=policy,
        reviews=log,
    )


def regret(trace: RunTrace, instance: ProblemInstance) -> float:
    """Benchmark revenue over the horizon minus realised revenue (not clamped)."""
    return trace.T * benchmark_revenue(instance) - math.fsum(
        (trace.price * trace.bought).tolist()
    )
