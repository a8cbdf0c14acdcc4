"""Posted-price selling to buyers who learn their values from reviews."""

from .buyers import BuyerModel, buyer_threshold, compute_lb, decide_purchase, parse_buyer
from .experiments import (
    ExperimentConfig,
    PowerLawRegressor,
    SweepResult,
    episode_seed,
    fit_scaling_exponent,
    run_sweep,
    validate_pessimism_coverage,
    validate_rev_oracle,
)
from .instances import (
    InstanceSpec,
    build_easy_instance,
    build_hard_instance,
    build_random_instance,
    q_threshold,
)
from .market import (
    ExPostDistribution,
    ProblemInstance,
    ReviewLog,
    benchmark_revenue,
    optimal_price,
    rev,
    sample_ex_post,
    sample_type,
)
from .sellers import (
    FixedPrice,
    SellerPolicy,
    TwoPhasePricing,
    baseline_fixed_price,
    default_lambda,
    parse_policy,
    phase1_length,
    type_elimination,
)
from .simulation import RunTrace, regret, run_episode

__version__ = "0.1.0"
