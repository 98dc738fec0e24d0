"""The weighted difference statistic, weight families, rank statistics,
and the variance/standard-error estimators behind the tests.

The central statistic is a difference of inclusion-weighted response
sums: D = sum_{j: t_j=1} y_j/w(1,j) - sum_{j: t_j=2} y_j/w(2,j). The
weight family decides what D estimates: arm sizes give a difference of
arm means; n times assignment-inclusion probabilities make D unbiased
for the sample-level effect over the randomization distribution; N times
joint inclusion probabilities make it unbiased for the population-level
effect over the selection distribution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import AssignmentVector, ObservedExperiment, SampleVector
from .designs import (
    AssignmentDesign,
    CensusCRD,
    ExplicitJoint,
    SelectionDesign,
    UniformCRD,
    inclusion_table,
)
from .errors import (
    DataValidationError,
    DesignInvalidError,
    DegenerateDataError,
    InsufficientDataError,
    UnsupportedDesignError,
)


@dataclass(frozen=True)
class ArmSizeWeights:
    """w(t, j) = n_t: D becomes the difference of unweighted arm means."""


@dataclass(frozen=True)
class AssignmentInclusionWeights:
    """w(t, j) = n * P(position j gets treatment t) under the design."""

    design: AssignmentDesign


@dataclass(frozen=True)
class SelectionInclusionWeights:
    """w(t, j) = N * P(unit s_j is sampled with treatment t)."""

    design: SelectionDesign


WeightFamily = Union[ArmSizeWeights, AssignmentInclusionWeights, SelectionInclusionWeights]


def resolve_weights(
    family: WeightFamily, sample: SampleVector, assignment: AssignmentVector
) -> np.ndarray:
    """Per-observation weight table, shape (2, n); row t-1 holds w(t, j).

    Entries may be zero at (t, j) pairs the design can never produce;
    d_statistic skips such terms by the 0/0 convention. A zero weight at
    an observed label means the data are impossible under the design and
    raises.
    """
    n = assignment.n
    if sample.n != n:
        raise DataValidationError("sample and assignment must have equal length")
    if isinstance(family, ArmSizeWeights):
        table = np.empty((2, n))
        table[0, :] = assignment.n1
        table[1, :] = assignment.n2
    elif isinstance(family, AssignmentInclusionWeights):
        design = family.design
        if design.n != n:
            raise DesignInvalidError(
                f"design is for n={design.n} but the data have n={n}"
            )
        table = n * inclusion_table(design)
    elif isinstance(family, SelectionInclusionWeights):
        design = family.design
        table = np.empty((2, n))
        if isinstance(design, CensusCRD):
            if sorted(int(i) for i in sample.indices) != list(
                range(1, design.n_population + 1)
            ):
                raise DesignInvalidError(
                    "census design requires the sample to be the whole population"
                )
            table[0, :] = design.n1
            table[1, :] = design.n2
        elif isinstance(design, ExplicitJoint):
            big_n = design.n_population
            pi = np.zeros((2, n))
            for (s, t), prob in zip(design.support, design.probs):
                for j, unit in enumerate(sample.indices):
                    hit = (s.indices == unit) & (t.labels == 1)
                    if np.any(hit):
                        pi[0, j] += float(prob)
                    hit = (s.indices == unit) & (t.labels == 2)
                    if np.any(hit):
                        pi[1, j] += float(prob)
            table = big_n * pi
        else:
            raise DataValidationError(
                f"unknown selection design {type(design).__name__}"
            )
    else:
        raise DataValidationError(f"unknown weight family {type(family).__name__}")
    observed = table[assignment.labels - 1, np.arange(n)]
    if np.any(observed == 0.0):
        j = int(np.argmax(observed == 0.0))
        raise DesignInvalidError(
            f"zero inclusion probability for the observed label at position {j + 1}"
        )
    return table


def d_statistic(
    responses: np.ndarray, assignment: AssignmentVector, weights: np.ndarray
) -> float:
    """Difference of weighted response sums; empty arms contribute 0.

    The 0/0 convention is an explicit branch: a term enters only when its
    arm indicator is 1, so zero weights at never-assigned coordinates are
    harmless, while a zero weight on an active term is a design error.
    """
    responses = np.asarray(responses, dtype=np.float64)
    if not np.all(np.isfinite(responses)):
        raise DataValidationError("responses must be finite")
    if len(responses) != assignment.n or weights.shape != (2, assignment.n):
        raise DataValidationError("responses, assignment and weights must align")
    total = 0.0
    for arm, sign in ((1, 1.0), (2, -1.0)):
        mask = assignment.labels == arm
        if not np.any(mask):
            continue
        w = weights[arm - 1, mask]
        if np.any(w == 0.0):
            raise DesignInvalidError(
                f"zero weight on an observed arm-{arm} term"
            )
        total += sign * float(np.sum(responses[mask] / w))
    return total


def rank_midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average of the ranks they span."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataValidationError("values must be finite")
    sorted_vals = np.sort(values)
    below = np.searchsorted(sorted_vals, values, side="left")
    through = np.searchsorted(sorted_vals, values, side="right")
    return (below + through + 1) / 2.0


def rank_sum_statistic(ranks: np.ndarray, assignment: AssignmentVector) -> float:
    ranks = np.asarray(ranks, dtype=np.float64)
    if len(ranks) != assignment.n:
        raise DataValidationError("ranks and assignment must have equal length")
    return float(np.sum(ranks[assignment.labels == 1]))


def sample_variance(values: np.ndarray, ddof: int = 1) -> float:
    values = np.asarray(values, dtype=np.float64)
    if len(values) < 2:
        raise InsufficientDataError("variance needs at least two observations")
    return float(np.var(values, ddof=ddof))


def welch_se(var1: float, n1: int, var2: float, n2: int) -> float:
    if n1 < 1 or n2 < 1:
        raise ValueError("arm sizes must be positive")
    if var1 < 0 or var2 < 0:
        raise ValueError("variances must be nonnegative")
    return float(np.sqrt(var1 / n1 + var2 / n2))


def welch_df(var1: float, n1: int, var2: float, n2: int) -> float:
    """Welch-Satterthwaite approximate degrees of freedom."""
    if n1 < 2 or n2 < 2:
        raise InsufficientDataError("degrees of freedom need both arms >= 2")
    a = var1 / n1
    b = var2 / n2
    denom = a * a / (n1 - 1) + b * b / (n2 - 1)
    if denom == 0.0:
        raise DegenerateDataError("both variances are zero")
    return (a + b) ** 2 / denom


def pooled_se(var1: float, n1: int, var2: float, n2: int) -> float:
    if n1 + n2 < 3:
        raise InsufficientDataError("pooled variance needs n1 + n2 >= 3")
    if n1 < 1 or n2 < 1:
        raise ValueError("arm sizes must be positive")
    if var1 < 0 or var2 < 0:
        raise ValueError("variances must be nonnegative")
    pooled_var = ((n1 - 1) * var1 + (n2 - 1) * var2) / (n1 + n2 - 2)
    return float(np.sqrt(pooled_var * (1.0 / n1 + 1.0 / n2)))


def neyman_se(observed: ObservedExperiment, design: AssignmentDesign) -> float:
    """Standard error for the variance-bound estimator of sd(D | design).

    Only defined for uniform CRD; no estimator exists for general
    inclusion probabilities (zero second-order inclusions make the
    design nonmeasurable).

    Uses divide-by-n arm variances, not the unbiased n-1 form. The bound
    is tight under unit-treatment additivity, where this divisor makes it
    sit slightly low at small arm sizes (visible as mild anti-conservatism
    in size simulations); the t tests use the n-1 divisor instead, which
    is why this SE is smaller than welch_se on the same data.
    """
    if not isinstance(design, UniformCRD):
        raise UnsupportedDesignError(
            "the variance-bound estimator is only defined for UniformCRD; "
            "no estimator is available for general inclusion probabilities "
            "(an open problem for nonuniform designs)"
        )
    if design.n != observed.n or design.n1 != observed.n1:
        raise DesignInvalidError(
            "design arm sizes do not match the observed assignment"
        )
    arm1 = observed.arm_responses(1)
    arm2 = observed.arm_responses(2)
    if len(arm1) < 2 or len(arm2) < 2:
        raise InsufficientDataError("both arms need >= 2 observations")
    v1 = float(np.mean((arm1 - arm1.mean()) ** 2))
    v2 = float(np.mean((arm2 - arm2.mean()) ** 2))
    return float(np.sqrt(v1 / len(arm1) + v2 / len(arm2)))
