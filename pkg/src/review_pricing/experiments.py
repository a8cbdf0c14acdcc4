"""Experiment driver: configs, seeded replicate sweeps, scaling fits and the
statistical validation suites."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_eta, check_positive_int
from .buyers import BuyerModel, parse_buyer
from .instances import InstanceSpec
from .market import ProblemInstance, rev, sample_type
from .sellers import SellerPolicy, TwoPhasePricing, parse_policy
from .simulation import run_episode

SUMMARY_HEADER = ("policy", "T", "replicates", "mean_regret", "std_err")
REPLICATE_HEADER = ("policy", "T", "replicate", "seed", "total_revenue", "regret")
EXPONENT_HEADER = ("policy", "slope", "intercept", "n_points")


def episode_seed(base_seed: int, policy: str, T: int, replicate: int) -> int:
    """Stable 64-bit seed for one episode of a sweep."""
    key = f"{int(base_seed)}|{policy}|{int(T)}|{int(replicate)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


@dataclass
class ExperimentConfig:
    instance: InstanceSpec
    policies: list[str]
    buyer: str = "exact_lb"
    eta: float = 0.1
    horizons: list[int] = field(default_factory=lambda: [1000])
    replicates: int = 1
    base_seed: int = 0
    output_dir: str = "results"
    phase1_constant: float = 2.0
    lam: float | str = "auto"
    jobs: int = 1
    base_dir: Path | None = None

    def __post_init__(self):
        if isinstance(self.instance, dict):
            self.instance = InstanceSpec.from_dict(self.instance)
        if isinstance(self.policies, str):
            self.policies = [self.policies]
        if not self.policies:
            raise ValueError("at least one policy is required")
        check_eta(self.eta)
        check_positive_int(self.replicates, "replicates")
        self.horizons = [check_positive_int(T, "horizon") for T in self.horizons]
        if not self.horizons or any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError(f"horizons must be non-empty and strictly increasing, got {self.horizons}")
        if self.phase1_constant < 0:
            raise ValueError("phase1_constant must be >= 0")
        if self.lam != "auto" and not 0.0 < float(self.lam) <= 1.0:
            raise ValueError(f"lambda must be 'auto' or in (0, 1], got {self.lam}")
        check_positive_int(self.jobs, "jobs")
        parse_buyer(self.buyer, self.eta)
        probe = self.instance_for(self.horizons[0])
        for spec in self.policies:
            self.policy_for(spec, probe)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data, base_dir=base_dir)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base_dir=path.parent)

    def instance_for(self, T: int) -> ProblemInstance:
        return self.instance.resolve(T, self.base_dir)

    def policy_for(self, spec: str, instance: ProblemInstance) -> SellerPolicy:
        return parse_policy(
            spec, instance, lam=self.lam, phase1_constant=self.phase1_constant, eta=self.eta
        )

    def buyer_model(self) -> BuyerModel:
        return parse_buyer(self.buyer, self.eta)


@dataclass(frozen=True)
class CellStats:
    mean_regret: float
    std_err: float
    regrets: tuple[float, ...]
    revenues: tuple[float, ...] = ()
    seeds: tuple[int, ...] = ()

    @property
    def replicates(self) -> int:
        return len(self.regrets)


def _cell_stats(regrets: Sequence[float], revenues=(), seeds=()) -> CellStats:
    arr = np.asarray(regrets, dtype=float)
    R = arr.size
    mean = math.fsum(arr.tolist()) / R
    se = float(np.std(arr, ddof=1)) / math.sqrt(R) if R > 1 else 0.0
    return CellStats(mean, se, tuple(arr.tolist()), tuple(revenues), tuple(seeds))


@dataclass
class SweepResult:
    """Regret statistics per (policy, horizon) and a fitted exponent per policy."""

    cells: dict[tuple[str, int], CellStats]
    exponents: dict[str, tuple[float, float, int]]

    def mean_regret(self, policy: str, T: int) -> float:
        return self.cells[(policy, T)].mean_regret

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for (policy, T), c in self.cells.items():
            w.writerow((policy, T, c.replicates, repr(c.mean_regret), repr(c.std_err)))
        return buf.getvalue()

    def replicates_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPLICATE_HEADER)
        for (policy, T), c in self.cells.items():
            for r, (seed, revenue, reg) in enumerate(zip(c.seeds, c.revenues, c.regrets)):
                w.writerow((policy, T, r, seed, repr(revenue), repr(reg)))
        return buf.getvalue()

    def exponent_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EXPONENT_HEADER)
        for policy, (slope, intercept, n) in self.exponents.items():
            w.writerow((policy, repr(slope), repr(intercept), n))
        return buf.getvalue()

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "summary": out / "summary.csv",
            "replicates": out / "replicates.csv",
            "exponents": out / "exponents.csv",
        }
        paths["summary"].write_text(self.summary_csv())
        paths["replicates"].write_text(self.replicates_csv())
        paths["exponents"].write_text(self.exponent_csv())
        return paths

    @staticmethod
    def parse_summary(text: str) -> dict[tuple[str, int], tuple[int, float, float]]:
        """Parse summary CSV text into ``{(policy, T): (replicates, mean, std_err)}``."""
        return {
            (r["policy"], int(r["T"])): (int(r["replicates"]), float(r["mean_regret"]), float(r["std_err"]))
            for r in csv.DictReader(io.StringIO(text))
        }


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log y = intercept + slope * log x``.

    Non-positive targets cannot be logged; they are dropped with a warning.
    After ``fit``, ``coef_`` is the exponent and ``intercept_`` the log-scale
    intercept.
    """

    def fit(self, X, y):
        x = np.asarray(X, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError(f"X and y have different lengths ({x.size} vs {y.size})")
        keep = (y > 0) & (x > 0) & np.isfinite(y)
        if not keep.all():
            warnings.warn(
                f"dropping {int((~keep).sum())} non-positive point(s) from the log-log fit",
                RuntimeWarning,
                stacklevel=2,
            )
        x, y = x[keep], y[keep]
        if x.size < 2 or np.unique(x).size < 2:
            raise ValueError("need at least 2 usable points with distinct x for a log-log fit")
        A = np.column_stack([np.log(x), np.ones_like(x)])
        (slope, intercept), *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
        self.coef_ = float(slope)
        self.intercept_ = float(intercept)
        self.n_points_ = int(x.size)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        x = np.asarray(X, dtype=float).reshape(-1)
        return np.exp(self.intercept_) * x**self.coef_


def fit_scaling_exponent(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Return ``(slope, intercept)`` of the log-log regression of regret on T."""
    pts = list(points)
    model = PowerLawRegressor().fit([p[0] for p in pts], [p[1] for p in pts])
    return model.coef_, model.intercept_


def _sweep_task(task):
    instance, policy, buyer, seed = task
    trace = run_episode(instance, policy, buyer, seed)
    return trace.total_revenue, trace.regret


def _map(func, tasks, jobs):
    if jobs <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_sweep(config: ExperimentConfig, jobs: int | None = None, write: bool = True) -> SweepResult:
    """Run every (policy, horizon, replicate) episode and aggregate regrets.

    Results are gathered in task order, so they do not depend on ``jobs``.
    """
    jobs = config.jobs if jobs is None else jobs
    buyer = config.buyer_model()
    tasks, keys = [], []
    for policy_spec in config.policies:
        for T in config.horizons:
            instance = config.instance_for(T)
            policy = config.policy_for(policy_spec, instance)
            for r in range(config.replicates):
                seed = episode_seed(config.base_seed, policy_spec, T, r)
                tasks.append((instance, policy, buyer, seed))
                keys.append((policy_spec, T, seed))
    outcomes = _map(_sweep_task, tasks, jobs)

    grouped: dict[tuple[str, int], list] = {}
    for (policy_spec, T, seed), (revenue, reg) in zip(keys, outcomes):
        grouped.setdefault((policy_spec, T), []).append((seed, revenue, reg))
    cells = {
        key: _cell_stats([g[2] for g in rows], [g[1] for g in rows], [g[0] for g in rows])
        for key, rows in grouped.items()
    }
    exponents = {}
    for policy_spec in config.policies:
        pts = [(T, cells[(policy_spec, T)].mean_regret) for T in config.horizons]
        if len(pts) < 2:
            exponents[policy_spec] = (math.nan, math.nan, len(pts))
            continue
        try:
            model = PowerLawRegressor().fit([p[0] for p in pts], [p[1] for p in pts])
            exponents[policy_spec] = (model.coef_, model.intercept_, model.n_points_)
        except ValueError:
            n_ok = sum(1 for _, m in pts if m > 0)
            exponents[policy_spec] = (math.nan, math.nan, n_ok)
    result = SweepResult(cells, exponents)
    if write:
        out = Path(config.output_dir)
        if config.base_dir is not None and not out.is_absolute():
            out = config.base_dir / out
        result.write(out)
    return result


@dataclass(frozen=True)
class CoverageReport:
    violation_rate: float
    bound: float
    n_episodes: int
    eta: float

    @property
    def passed(self) -> bool:
        return self.violation_rate <= self.bound


def _coverage_task(task):
    instance, policy, buyer, seed = task
    trace = run_episode(instance, policy, buyer, seed)
    theta = np.asarray(instance.theta)
    return bool(np.any(trace.threshold > theta[trace.type]))


def validate_pessimism_coverage(
    instance: ProblemInstance,
    policy: SellerPolicy,
    n_episodes: int,
    eta: float,
    base_seed: int = 0,
    jobs: int = 1,
) -> CoverageReport:
    """Fraction of episodes with some round where the buyer's lower confidence
    bound exceeds its true ex-ante value, against ``eta + 3 sqrt(eta(1-eta)/N)``."""
    eta = check_eta(eta)
    n_episodes = check_positive_int(n_episodes, "n_episodes")
    buyer = BuyerModel("exact_lb", eta=eta)
    name = type(policy).__name__
    tasks = [
        (instance, policy, buyer, episode_seed(base_seed, name, instance.horizon_T, k))
        for k in range(n_episodes)
    ]
    violations = sum(_map(_coverage_task, tasks, jobs))
    bound = eta + 3.0 * math.sqrt(eta * (1.0 - eta) / n_episodes)
    return CoverageReport(violations / n_episodes, bound, n_episodes, eta)


@dataclass(frozen=True)
class RevOracleCheck:
    price: float
    Q: tuple[int, ...]
    analytic: float
    empirical: float
    band: float

    @property
    def deviation(self) -> float:
        return abs(self.analytic - self.empirical)

    @property
    def passed(self) -> bool:
        # 1e-12 absorbs rounding when the purchase probability is exactly 0 or 1.
        return self.deviation <= self.band + 1e-12


@dataclass(frozen=True)
class RevOracleReport:
    checks: tuple[RevOracleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max(c.deviation for c in self.checks)


def empirical_rev(p: float, Q: Sequence[int], instance: ProblemInstance, types: np.ndarray) -> float:
    """Mean of ``p * 1(theta_i >= p and i in Q)`` over a sample of buyer types."""
    theta = np.asarray(instance.theta)
    in_Q = np.zeros(instance.d, dtype=bool)
    in_Q[list(Q)] = True
    hits = in_Q[types] & (theta[types] >= p)
    return p * (int(hits.sum()) / types.size)


def validate_rev_oracle(
    instance: ProblemInstance, n: int = 100_000, n_pairs: int = 20, seed: int = 0
) -> RevOracleReport:
    """Compare the analytic restricted revenue with a Monte Carlo estimate on
    random (price, type subset) pairs; each must agree within 4 standard errors."""
    if n < 10_000:
        raise ValueError("use at least 10^4 type draws")
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(n_pairs):
        if rng.random() < 0.5:
            p = float(instance.theta[int(rng.integers(instance.d))])
        else:
            p = float(rng.uniform())
        Q = tuple(int(i) for i in np.flatnonzero(rng.random(instance.d) < 0.5))
        analytic = rev(p, Q, instance)
        v = analytic / p if p > 0 else 0.0
        types = sample_type(instance, rng, size=n)
        emp = empirical_rev(p, Q, instance, types)
        band = 4.0 * math.sqrt(p * p * v * (1.0 - v) / n) if 0.0 < v < 1.0 else 0.0
        checks.append(RevOracleCheck(p, Q, analytic, emp, band))
    return RevOracleReport(tuple(checks))


def concentration_violations(
    instance: ProblemInstance,
    policy: TwoPhasePricing,
    buyer: BuyerModel,
    seed: int,
    checkpoints: Sequence[int],
) -> dict[int, bool]:
    """For each checkpoint round, whether some active type's restricted revenue
    falls outside the seller's confidence interval after that round's update."""
    targets = set(checkpoints)
    snapshots: dict[int, bool] = {}
    pending = {}

    def observer(t, pol, price, i, tau, b):
        # The update for round t happens after this call; grab it on the next.
        if t - 1 in pending:
            snapshots[t - 1] = _outside(pol)
            del pending[t - 1]
        if t in targets:
            pending[t] = True

    def _outside(pol):
        Q = pol.Q_
        for i, (lo, hi) in pol.revenue_bounds().items():
            r = rev(pol.theta_[i], Q, instance)
            if not lo <= r <= hi:
                return True
        return False

    trace = run_episode(instance, policy, buyer, seed, observer=observer)
    for t in pending:
        snapshots[t] = _outside(trace.policy)
    return snapshots
