"""The test procedures and the exact / Monte Carlo / asymptotic p-value
engines.

Each procedure reports the hypothesis it addresses and the assumptions
it needs, because the same arithmetic can mean different things: the
permutation test and the Fisher randomization test produce numerically
identical p-values under a uniform completely randomized design, yet one
speaks about the generating process and the other about the realized
potential values of the sampled units.

Two-sided conventions follow each statistic's own definition: the
absolute-value tail for difference statistics and the studentized
statistics, the doubled smaller tail (capped at 1) for the rank sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NoReturn, Optional, Union

import numpy as np

from .core import Hypothesis, ObservedExperiment
from .designs import (
    ENUMERATION_CAP,
    AssignmentDesign,
    Explicit,
    RngStream,
    SelectionDesign,
    UniformCRD,
    check_both_arm_inclusion,
    reduces_to_census,
    sample_assignment_batch,
    support_label_matrix,
)
from .errors import (
    DataValidationError,
    DegenerateDataError,
    DesignInvalidError,
    InsufficientDataError,
    NoncomputableDistributionError,
    UnsupportedDesignError,
)
from .special import normal_cdf, student_t_cdf
from .stats import (
    ArmSizeWeights,
    AssignmentInclusionWeights,
    SelectionInclusionWeights,
    d_statistic,
    neyman_se,
    pooled_se,
    rank_midranks,
    rank_sum_statistic,
    resolve_weights,
    sample_variance,
    welch_df,
    welch_se,
)

# A resampled statistic within this relative distance of the observed one
# counts as extreme. Protects exact-mode rational p-values from roundoff
# in recomputed statistics; the bias is conservative.
REL_TOL = 1e-9

_MC_CHUNK = 100_000


@dataclass(frozen=True)
class ExactEngine:
    """Full-support enumeration; p-values are exact tail probabilities."""

    enumeration_cap: int = ENUMERATION_CAP


@dataclass(frozen=True)
class MonteCarloEngine:
    """Seeded resampling from the design with the add-one correction."""

    budget: int
    rng: RngStream

    def __post_init__(self):
        if self.budget < 1000:
            raise DataValidationError("Monte Carlo budget must be >= 1000")


@dataclass(frozen=True)
class AsymptoticEngine:
    """Reference-distribution approximation; no resampling."""


PValueEngine = Union[ExactEngine, MonteCarloEngine, AsymptoticEngine]


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test on one dataset.

    p_value_kind is "exact", "monte_carlo" (with mc_stderr set) or
    "asymptotic". degenerate flags data that admit no informative
    statistic (e.g. constant responses), where p = 1 by construction.
    """

    test: str
    hypothesis: Hypothesis
    statistic: float
    p_value: float
    p_value_kind: str
    mc_stderr: Optional[float]
    assumptions: tuple
    n1: int
    n2: int
    degenerate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise DataValidationError("p-value must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "hypothesis": self.hypothesis.value,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_value_kind": self.p_value_kind,
            "mc_stderr": self.mc_stderr,
            "assumptions": list(self.assumptions),
            "n1": self.n1,
            "n2": self.n2,
            "degenerate": self.degenerate,
        }


def monte_carlo_pvalue(
    observed_stat: float,
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    budget: int,
    rng: RngStream,
) -> tuple:
    """Add-one two-sided Monte Carlo p-value and its standard error.

    sampler(generator, count) must return count statistics drawn under
    the null. p = (1 + #{|stat| >= |observed|}) / (budget + 1), which is
    a valid p-value for any budget; stderr = sqrt(p(1-p)/budget).
    """
    if budget < 1000:
        raise DataValidationError("Monte Carlo budget must be >= 1000")
    gen = rng.generator()
    threshold = abs(observed_stat) * (1.0 - REL_TOL)
    hits = 0
    remaining = budget
    while remaining > 0:
        take = min(_MC_CHUNK, remaining)
        stats = np.asarray(sampler(gen, take), dtype=np.float64)
        hits += int(np.count_nonzero(np.abs(stats) >= threshold))
        remaining -= take
    p = (1 + hits) / (budget + 1)
    return p, math.sqrt(p * (1.0 - p) / budget)


def _require_two_arms(observed: ObservedExperiment) -> None:
    if observed.n1 < 1 or observed.n2 < 1:
        raise InsufficientDataError("both treatment arms must be nonempty")


def _split_coefficients(responses: np.ndarray, weights: np.ndarray):
    """Reduce D over relabelings to an affine form: D(t') = mask1 @ coef + offset."""
    coef = responses / weights[0] + responses / weights[1]
    offset = -float(np.sum(responses / weights[1]))
    return coef, offset


def _exact_support_stats(design, coef, offset, cap):
    labels, probs = support_label_matrix(design, cap)
    stats = (labels == 1).astype(np.float64) @ coef + offset
    return stats, probs


def _support_tail_probs(stats, probs, observed):
    """(|stat| tail, upper tail, lower tail) masses over an enumerated support.

    Tails spanning the whole support can accumulate to 1 + O(eps); clamp so
    downstream p-value range checks stay strict.
    """
    thr = abs(observed) * (1.0 - REL_TOL)
    tol = REL_TOL * max(1.0, abs(observed))
    p_abs = min(float(probs[np.abs(stats) >= thr].sum()), 1.0)
    upper = min(float(probs[stats >= observed - tol].sum()), 1.0)
    lower = min(float(probs[stats <= observed + tol].sum()), 1.0)
    return p_abs, upper, lower


def _exact_abs_pvalue(design, coef, offset, observed, cap) -> float:
    stats, probs = _exact_support_stats(design, coef, offset, cap)
    return _support_tail_probs(stats, probs, observed)[0]


def _exact_tail_probs(design, coef, offset, observed, cap):
    stats, probs = _exact_support_stats(design, coef, offset, cap)
    return _support_tail_probs(stats, probs, observed)[1:]


def _batch_counts(labels, coef, offset, observed):
    """Tail counts of the affine statistic over one drawn label batch."""
    stats = (labels == 1).astype(np.float64) @ coef + offset
    thr = abs(observed) * (1.0 - REL_TOL)
    tol = REL_TOL * max(1.0, abs(observed))
    n_abs = int(np.count_nonzero(np.abs(stats) >= thr))
    n_up = int(np.count_nonzero(stats >= observed - tol))
    n_lo = int(np.count_nonzero(stats <= observed + tol))
    return n_abs, n_up, n_lo


def _mc_counts(design, coef, offset, observed, budget, rng):
    """Counts of |stat| >= |obs|, stat >= obs, stat <= obs over seeded draws.

    One shared driver for all resampling tests: identical (design, budget,
    stream) means identical label draws, which is what makes permutation
    and Fisher-randomization Monte Carlo p-values coincide exactly under
    a uniform CRD.
    """
    gen = rng.generator()
    n_abs = n_up = n_lo = 0
    remaining = budget
    while remaining > 0:
        take = min(_MC_CHUNK, remaining)
        labels = sample_assignment_batch(design, take, gen)
        counts = _batch_counts(labels, coef, offset, observed)
        n_abs += counts[0]
        n_up += counts[1]
        n_lo += counts[2]
        remaining -= take
    return n_abs, n_up, n_lo


def _addone(hits: int, budget: int):
    p = (1 + hits) / (budget + 1)
    return p, math.sqrt(p * (1.0 - p) / budget)


def permutation_test(observed: ObservedExperiment, engine: PValueEngine) -> TestReport:
    """Two-sided test of the distributional process null via the
    difference of arm means over all relabelings at fixed arm sizes."""
    _require_two_arms(observed)
    design = UniformCRD(observed.n, observed.n1)
    weights = resolve_weights(ArmSizeWeights(), observed.sample, observed.assignment)
    d_obs = d_statistic(observed.responses, observed.assignment, weights)
    coef, offset = _split_coefficients(observed.responses, weights)
    degenerate = bool(np.ptp(observed.responses) == 0.0)
    if isinstance(engine, ExactEngine):
        p = _exact_abs_pvalue(design, coef, offset, d_obs, engine.enumeration_cap)
        kind, stderr = "exact", None
    elif isinstance(engine, MonteCarloEngine):
        n_abs, _, _ = _mc_counts(design, coef, offset, d_obs, engine.budget, engine.rng)
        p, stderr = _addone(n_abs, engine.budget)
        kind = "monte_carlo"
    else:
        raise DataValidationError(
            "permutation test supports Exact or MonteCarlo engines"
        )
    return TestReport(
        test="permutation",
        hypothesis=Hypothesis.DUP,
        statistic=d_obs,
        p_value=p,
        p_value_kind=kind,
        mc_stderr=stderr,
        assumptions=("A1", "A2", "A3"),
        n1=observed.n1,
        n2=observed.n2,
        degenerate=degenerate,
    )


def wilcoxon_test(observed: ObservedExperiment, engine: PValueEngine) -> TestReport:
    """Rank-sum test with midranks; p = min(1, 2 * smaller tail)."""
    _require_two_arms(observed)
    design = UniformCRD(observed.n, observed.n1)
    ranks = rank_midranks(observed.responses)
    w_obs = rank_sum_statistic(ranks, observed.assignment)
    degenerate = bool(np.ptp(observed.responses) == 0.0)
    if isinstance(engine, ExactEngine):
        upper, lower = _exact_tail_probs(
            design, ranks, 0.0, w_obs, engine.enumeration_cap
        )
        p = min(1.0, 2.0 * min(upper, lower))
        kind, stderr = "exact", None
    elif isinstance(engine, MonteCarloEngine):
        _, n_up, n_lo = _mc_counts(design, ranks, 0.0, w_obs, engine.budget, engine.rng)
        p_up, se_up = _addone(n_up, engine.budget)
        p_lo, se_lo = _addone(n_lo, engine.budget)
        # stderr of the doubled smaller tail, before the cap at 1
        p = min(1.0, 2.0 * min(p_up, p_lo))
        stderr = 2.0 * (se_up if p_up <= p_lo else se_lo)
        kind = "monte_carlo"
    else:
        raise DataValidationError("rank-sum test supports Exact or MonteCarlo engines")
    return TestReport(
        test="wilcoxon",
        hypothesis=Hypothesis.DUP,
        statistic=w_obs,
        p_value=p,
        p_value_kind=kind,
        mc_stderr=stderr,
        assumptions=("A1", "A2", "A3", "A4"),
        n1=observed.n1,
        n2=observed.n2,
        degenerate=degenerate,
    )


def welch_t_test(observed: ObservedExperiment) -> TestReport:
    """Unequal-variance t test of equal treatment means."""
    arm1 = observed.arm_responses(1)
    arm2 = observed.arm_responses(2)
    if len(arm1) < 2 or len(arm2) < 2:
        raise InsufficientDataError("both arms need >= 2 observations")
    v1 = sample_variance(arm1)
    v2 = sample_variance(arm2)
    se = welch_se(v1, len(arm1), v2, len(arm2))
    if se == 0.0:
        raise DegenerateDataError("zero standard error: responses carry no variation")
    t = float(arm1.mean() - arm2.mean()) / se
    df = welch_df(v1, len(arm1), v2, len(arm2))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return TestReport(
        test="welch_t",
        hypothesis=Hypothesis.EUP,
        statistic=t,
        p_value=min(1.0, max(0.0, p)),
        p_value_kind="asymptotic",
        mc_stderr=None,
        assumptions=("A1", "A2", "A3", "A5"),
        n1=observed.n1,
        n2=observed.n2,
    )


def pooled_t_test(observed: ObservedExperiment) -> TestReport:
    """Equal-variance two-sample t test of equal treatment means."""
    arm1 = observed.arm_responses(1)
    arm2 = observed.arm_responses(2)
    if len(arm1) < 2 or len(arm2) < 2:
        raise InsufficientDataError("both arms need >= 2 observations")
    v1 = sample_variance(arm1)
    v2 = sample_variance(arm2)
    se = pooled_se(v1, len(arm1), v2, len(arm2))
    if se == 0.0:
        raise DegenerateDataError("zero standard error: responses carry no variation")
    t = float(arm1.mean() - arm2.mean()) / se
    df = float(len(arm1) + len(arm2) - 2)
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return TestReport(
        test="pooled_t",
        hypothesis=Hypothesis.EUP,
        statistic=t,
        p_value=min(1.0, max(0.0, p)),
        p_value_kind="asymptotic",
        mc_stderr=None,
        assumptions=("A1", "A2", "A3", "A6"),
        n1=observed.n1,
        n2=observed.n2,
    )


def _check_observed_in_support(observed: ObservedExperiment, design) -> None:
    if isinstance(design, UniformCRD):
        if design.n1 != observed.n1:
            raise DesignInvalidError(
                "observed arm sizes are impossible under the stated design"
            )
    elif isinstance(design, Explicit):
        member = np.any(
            np.all(design.label_matrix() == observed.assignment.labels, axis=1)
        )
        if not member:
            raise DesignInvalidError(
                "observed assignment is outside the design support"
            )


def fisher_randomization_test(
    observed: ObservedExperiment, design: AssignmentDesign, engine: PValueEngine
) -> TestReport:
    """Exact-conditional test of the sharp sample null.

    Under that null both potentials of every sampled unit equal its
    observed response, so the inclusion-weighted difference statistic has
    a fully known distribution over the design's support.
    """
    _require_two_arms(observed)
    check_both_arm_inclusion(design)
    _check_observed_in_support(observed, design)
    weights = resolve_weights(
        AssignmentInclusionWeights(design), observed.sample, observed.assignment
    )
    d_obs = d_statistic(observed.responses, observed.assignment, weights)
    coef, offset = _split_coefficients(observed.responses, weights)
    degenerate = bool(np.ptp(observed.responses) == 0.0)
    if isinstance(engine, ExactEngine):
        p = _exact_abs_pvalue(design, coef, offset, d_obs, engine.enumeration_cap)
        kind, stderr = "exact", None
    elif isinstance(engine, MonteCarloEngine):
        n_abs, _, _ = _mc_counts(design, coef, offset, d_obs, engine.budget, engine.rng)
        p, stderr = _addone(n_abs, engine.budget)
        kind = "monte_carlo"
    else:
        raise DataValidationError(
            "randomization test supports Exact or MonteCarlo engines"
        )
    return TestReport(
        test="fisher_rand",
        hypothesis=Hypothesis.RUs,
        statistic=d_obs,
        p_value=p,
        p_value_kind=kind,
        mc_stderr=stderr,
        assumptions=("B1", "B2"),
        n1=observed.n1,
        n2=observed.n2,
        degenerate=degenerate,
    )


def neyman_randomization_test(
    observed: ObservedExperiment, design: AssignmentDesign
) -> TestReport:
    """Normal-approximation test of the sample average null, using the
    variance-bound standard error."""
    _require_two_arms(observed)
    se = neyman_se(observed, design)
    if se == 0.0:
        raise DegenerateDataError("zero standard error: responses carry no variation")
    weights = resolve_weights(
        AssignmentInclusionWeights(design), observed.sample, observed.assignment
    )
    d3 = d_statistic(observed.responses, observed.assignment, weights)
    z = d3 / se
    p = 2.0 * (1.0 - normal_cdf(abs(z)))
    return TestReport(
        test="neyman_rand",
        hypothesis=Hypothesis.RAs,
        statistic=z,
        p_value=min(1.0, max(0.0, p)),
        p_value_kind="asymptotic",
        mc_stderr=None,
        assumptions=("B1", "B2"),
        n1=observed.n1,
        n2=observed.n2,
    )


def neyman_selection_test(
    observed: ObservedExperiment, design: SelectionDesign
) -> TestReport:
    """Normal-approximation test of the population average null.

    Only census-reducible designs are supported: when the sample is the
    whole population the joint inclusion weights collapse to arm sizes
    and the statistic coincides with the randomization-based one.
    """
    _require_two_arms(observed)
    census = reduces_to_census(design)
    if census is None:
        raise UnsupportedDesignError(
            "the selection-based variance estimator is only defined for "
            "designs that reduce to a census with uniform CRD assignment"
        )
    weights = resolve_weights(
        SelectionInclusionWeights(design), observed.sample, observed.assignment
    )
    d23 = d_statistic(observed.responses, observed.assignment, weights)
    se = neyman_se(observed, census.assignment_design())
    if se == 0.0:
        raise DegenerateDataError("zero standard error: responses carry no variation")
    z = d23 / se
    p = 2.0 * (1.0 - normal_cdf(abs(z)))
    return TestReport(
        test="neyman_sel",
        hypothesis=Hypothesis.RAP,
        statistic=z,
        p_value=min(1.0, max(0.0, p)),
        p_value_kind="asymptotic",
        mc_stderr=None,
        assumptions=("C1", "C2"),
        n1=observed.n1,
        n2=observed.n2,
    )


def fisher_selection_test(
    observed: ObservedExperiment, design: SelectionDesign
) -> NoReturn:
    """Always raises: the exact-conditional population test does not exist.

    Under the sharp population null the unsampled units' potentials stay
    unobserved, so the statistic's null distribution over the selection
    design is known in form but not computable from the data.
    """
    raise NoncomputableDistributionError(
        "the sharp population null does not determine the full potential "
        "table: every unsampled unit has both potentials unobserved, so "
        "the null distribution is known but not computable from the data. "
        "Use fisher_randomization_test for the sampled units' sharp null, "
        "or neyman_selection_test for the population average null."
    )


def fisher_exact_2x2(observed: ObservedExperiment) -> TestReport:
    """Exact-conditional test for binary responses via the hypergeometric
    law of the arm-1 success count.

    Two-sided rule: sum the probabilities of all tables no more probable
    than the observed one. Computed in exact integer arithmetic on the
    common denominator C(n, n1), so no floating comparisons are needed.
    """
    _require_two_arms(observed)
    r = observed.responses
    if not np.all((r == 0.0) | (r == 1.0)):
        raise DataValidationError("responses must be binary (0/1)")
    n = observed.n
    n1 = observed.n1
    m = int(round(float(r.sum())))
    k_obs = int(round(float(observed.arm_responses(1).sum())))
    k_lo = max(0, n1 - (n - m))
    k_hi = min(n1, m)
    weights = {
        k: math.comb(m, k) * math.comb(n - m, n1 - k) for k in range(k_lo, k_hi + 1)
    }
    total = math.comb(n, n1)
    w_obs = weights[k_obs]
    numer = sum(w for w in weights.values() if w <= w_obs)
    return TestReport(
        test="fisher_exact",
        hypothesis=Hypothesis.RUs,
        statistic=float(k_obs),
        p_value=numer / total,
        p_value_kind="exact",
        mc_stderr=None,
        assumptions=("B1", "B2"),
        n1=observed.n1,
        n2=observed.n2,
        degenerate=bool(np.ptp(r) == 0.0),
    )
