"""Size and power estimation for the built-in benchmark scenario suites.

The data-generation model is a census: the sample is the whole
population with probability one and treatments follow a uniform
completely randomized design. Each scenario draws the first potential
column IID from a process law and builds the second column with an
effect transformation (or draws both columns jointly for the paired
binary laws).

Two conditioning rows are estimated per scenario. The "randomization"
row fixes one potential table and redraws the assignment every
replicate; the "process" row fixes the assignment and redraws the
potential table. Rejection rates are reported in percent with the
binomial standard error sqrt(r(100 - r) / replicates).

Reproducibility contract: replicate r of the randomization row consumes
substreams (2, r) for data and (4, 0, r) for the per-replicate Monte
Carlo batch; the process row uses (3, r) and (4, 1, r); the fixed table
and fixed assignment come from substreams (0, 0) and (1, 0). Results are
therefore independent of thread count.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import (
    AssignmentVector,
    Hypothesis,
    ObservedExperiment,
    PotentialTable,
    SampleVector,
    select_components,
)
from .designs import (
    RngStream,
    UniformCRD,
    sample_assignment,
    sample_assignment_batch,
    support_label_matrix,
)
from .errors import (
    DataValidationError,
    DegenerateDataError,
    UnknownScenarioError,
)
from .inference import (
    _MC_CHUNK,
    _addone,
    _batch_counts,
    _split_coefficients,
    _support_tail_probs,
    neyman_randomization_test,
    pooled_t_test,
    welch_t_test,
)
from .stats import (
    ArmSizeWeights,
    d_statistic,
    rank_midranks,
    rank_sum_statistic,
    resolve_weights,
)

# Everything below 100 belongs to the bulk mixture component, everything
# above to the rare one; any cut between the component supports works.
LARGE_OBSERVATION_THRESHOLD = 100.0

_MAX_CONDITION_ATTEMPTS = 200_000

DEFAULT_TEST_SUITE = (
    "permutation",
    "wilcoxon",
    "welch_t",
    "pooled_t",
    "fisher_rand",
    "neyman_rand",
)


# ---------------------------------------------------------------- laws


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not (self.sd > 0.0):
            raise DataValidationError("normal law needs sd > 0")

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return gen.normal(self.mean, self.sd, count)


@dataclass(frozen=True)
class GammaLaw:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0.0 and self.scale > 0.0):
            raise DataValidationError("gamma law needs shape > 0 and scale > 0")

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return gen.gamma(self.shape, self.scale, count)


@dataclass(frozen=True)
class UniformMixture:
    """weight * U(lo1, hi1) + (1 - weight) * U(lo2, hi2)."""

    weight: float
    lo1: float
    hi1: float
    lo2: float
    hi2: float

    def __post_init__(self):
        if not (0.0 <= self.weight <= 1.0):
            raise DataValidationError("mixture weight must lie in [0, 1]")
        if not (self.lo1 < self.hi1 and self.lo2 < self.hi2):
            raise DataValidationError("mixture intervals must have lo < hi")

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        first = gen.random(count) < self.weight
        lo = np.where(first, self.lo1, self.lo2)
        hi = np.where(first, self.hi1, self.hi2)
        return gen.uniform(lo, hi)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise DataValidationError("bernoulli p must lie in (0, 1)")

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return (gen.random(count) < self.p).astype(np.float64)


@dataclass(frozen=True)
class CorrelatedBernoulliPair:
    """Joint 0/1 pair with given margins and correlation.

    The joint cell P(y1=1, y2=1) = p1 p2 + rho sqrt(p1 q1 p2 q2) must
    give a valid 2x2 probability table.
    """

    p1: float
    p2: float
    correlation: float

    def __post_init__(self):
        if not (0.0 < self.p1 < 1.0 and 0.0 < self.p2 < 1.0):
            raise DataValidationError("pair margins must lie in (0, 1)")
        if not (-1.0 <= self.correlation <= 1.0):
            raise DataValidationError("correlation must lie in [-1, 1]")
        p11, p10, p01, p00 = self.cells()
        if min(p11, p10, p01, p00) < 0.0:
            raise DataValidationError(
                "correlation incompatible with the margins: joint cell "
                f"probabilities ({p11:.6f}, {p10:.6f}, {p01:.6f}, {p00:.6f})"
            )

    def cells(self):
        q1 = 1.0 - self.p1
        q2 = 1.0 - self.p2
        p11 = self.p1 * self.p2 + self.correlation * math.sqrt(
            self.p1 * q1 * self.p2 * q2
        )
        p10 = self.p1 - p11
        p01 = self.p2 - p11
        p00 = 1.0 - p11 - p10 - p01
        return p11, p10, p01, p00

    def draw_pairs(self, gen: np.random.Generator, count: int) -> np.ndarray:
        p11, p10, p01, _ = self.cells()
        u = gen.random(count)
        y1 = u < p11 + p10
        y2 = (u < p11) | ((u >= p11 + p10) & (u < p11 + p10 + p01))
        return np.vstack([y1, y2]).astype(np.float64)


ProcessLaw = Union[Normal, GammaLaw, UniformMixture, Bernoulli, CorrelatedBernoulliPair]


def random_deviates(law: ProcessLaw, count: int, rng) -> np.ndarray:
    """IID draws from a process law; pair laws return shape (2, count)."""
    if count < 1:
        raise DataValidationError("count must be positive")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if isinstance(law, CorrelatedBernoulliPair):
        return law.draw_pairs(gen, count)
    return law.draw(gen, count)


# ------------------------------------------------------------- effects


@dataclass(frozen=True)
class Identity:
    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        return y1.copy()


@dataclass(frozen=True)
class Shift:
    delta: float

    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        return y1 + self.delta


@dataclass(frozen=True)
class ShiftWithCenteredNoise:
    """y2 = y1 + delta + (E - mean(E)); centering keeps ybar2 - ybar1 = delta."""

    delta: float
    sd: float

    def __post_init__(self):
        if not (self.sd > 0.0):
            raise DataValidationError("noise sd must be > 0")

    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        noise = gen.normal(0.0, self.sd, len(y1))
        return y1 + self.delta + (noise - noise.mean())


@dataclass(frozen=True)
class Scale:
    factor: float

    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        return self.factor * y1


@dataclass(frozen=True)
class ScaleAboutMean:
    """y2 = factor * y1 - (factor - 1) * mean(y1), so ybar2 = ybar1 exactly."""

    factor: float

    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        return self.factor * y1 - (self.factor - 1.0) * float(y1.mean())


@dataclass(frozen=True)
class ScaleWithNoise:
    factor: float
    sd: float

    def __post_init__(self):
        if not (self.sd > 0.0):
            raise DataValidationError("noise sd must be > 0")

    def apply(self, y1: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        return self.factor * y1 + gen.normal(0.0, self.sd, len(y1))


Effect = Union[Identity, Shift, ShiftWithCenteredNoise, Scale, ScaleAboutMean, ScaleWithNoise]


# ----------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    """One benchmark data-generation setup under the census model.

    fixed_y, when present, overrides the generator for the
    randomization row. fixed_large_count conditions the one-off fixed
    draw of a mixture population on its count of rare-component values.
    adjust_equal_means redraws paired binary populations until the two
    potential columns have equal means.
    """

    name: str
    n1: int
    n2: int
    law: ProcessLaw
    effect: Optional[Effect]
    hypothesis_truth: tuple = ()
    fixed_y: Optional[PotentialTable] = None
    fixed_large_count: Optional[int] = None
    adjust_equal_means: bool = False
    description: str = ""

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise DataValidationError("scenario arms need n1, n2 >= 2")
        paired = isinstance(self.law, CorrelatedBernoulliPair)
        if paired and self.effect is not None:
            raise DataValidationError("paired laws draw both columns; effect must be None")
        if not paired and self.effect is None:
            raise DataValidationError("single-column laws need an effect")
        if self.fixed_y is not None and self.fixed_y.n_units != self.n_population:
            raise DataValidationError("fixed table size must match the population")

    @property
    def n_population(self) -> int:
        return self.n1 + self.n2

    @property
    def binary(self) -> bool:
        return isinstance(self.law, (Bernoulli, CorrelatedBernoulliPair))


def generate_population(scenario: Scenario, rng) -> PotentialTable:
    """One potential table drawn under the scenario's law and effect."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    n = scenario.n_population
    if isinstance(scenario.law, CorrelatedBernoulliPair):
        for _ in range(_MAX_CONDITION_ATTEMPTS):
            pairs = scenario.law.draw_pairs(gen, n)
            if not scenario.adjust_equal_means:
                break
            if int(pairs[0].sum()) == int(pairs[1].sum()):
                break
        else:
            raise RuntimeError(
                "gave up adjusting a paired binary population to equal means"
            )
        return PotentialTable(y1=pairs[0], y2=pairs[1])
    y1 = scenario.law.draw(gen, n)
    y2 = scenario.effect.apply(y1, gen)
    return PotentialTable(y1=y1, y2=y2)


def draw_fixed_population(scenario: Scenario, rng: RngStream) -> PotentialTable:
    """The randomization row's fixed table: the scenario's explicit one,
    or a single conditioned draw from substream (0, 0)."""
    if scenario.fixed_y is not None:
        return scenario.fixed_y
    gen = rng.substream(0, 0).generator()
    for _ in range(_MAX_CONDITION_ATTEMPTS):
        table = generate_population(scenario, gen)
        if scenario.fixed_large_count is None:
            return table
        count = int(np.count_nonzero(table.y1 > LARGE_OBSERVATION_THRESHOLD))
        if count == scenario.fixed_large_count:
            return table
    raise RuntimeError("gave up conditioning the fixed population draw")


def _table(y1, y2) -> PotentialTable:
    return PotentialTable(
        y1=np.asarray(y1, dtype=np.float64), y2=np.asarray(y2, dtype=np.float64)
    )


def _block_binary(n, both, only1, only2) -> PotentialTable:
    """Binary columns laid out in blocks: (1,1) x both, (1,0) x only1,
    (0,1) x only2, (0,0) x rest. Under a uniform CRD every unit ordering
    gives the same test-statistic distributions, so blocks lose nothing."""
    y1 = [1.0] * both + [1.0] * only1 + [0.0] * only2
    y2 = [1.0] * both + [0.0] * only1 + [1.0] * only2
    pad = n - len(y1)
    return _table(y1 + [0.0] * pad, y2 + [0.0] * pad)


_T3_SC6_VEC = (0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0)
_T3_SC7_Y1 = (1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0)
_T3_SC7_Y2 = (0, 0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0)
_T4_SC6_Y1 = (0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 1, 0, 1, 0)
_T4_SC6_Y2 = (0, 1, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1, 1)

_FIXED_BINARY = {
    (3, 6): (_T3_SC6_VEC, _T3_SC6_VEC),
    (3, 7): (_T3_SC7_Y1, _T3_SC7_Y2),
    (4, 6): (_T4_SC6_Y1, _T4_SC6_Y2),
}


def fixed_binary_vectors(table_id: int, scenario_id: int) -> PotentialTable:
    """The exact fixed 0/1 potential columns for the binary benchmark
    scenarios that publish them."""
    try:
        y1, y2 = _FIXED_BINARY[(table_id, scenario_id)]
    except KeyError:
        known = ", ".join(f"({t}, {s})" for t, s in sorted(_FIXED_BINARY))
        raise UnknownScenarioError(
            f"no fixed binary vectors for ({table_id}, {scenario_id}); "
            f"known pairs: {known}"
        ) from None
    return _table(y1, y2)


_NORMAL = Normal(10.0, 2.0)
_GAMMA = GammaLaw(1.0, 5.0)
_MIXTURE = UniformMixture(0.9, 0.0, 20.0, 200.0, 201.0)
_BERN = Bernoulli(0.28)

_UP = (Hypothesis.UP,)
_EUP_RAS = (Hypothesis.EUP, Hypothesis.RAs)
_DUP_RAS = (Hypothesis.DUP, Hypothesis.RAs)


def _sc(name, n, law, effect, truth, **kw) -> Scenario:
    half = n // 2
    return Scenario(
        name=name, n1=half, n2=half, law=law, effect=effect,
        hypothesis_truth=truth, **kw,
    )


SCENARIOS: dict = {}
for _s in (
    # size suite, 10 per arm
    _sc("t3.sc1", 20, _NORMAL, Identity(), _UP,
        description="size: normal responses, identical potentials"),
    _sc("t3.sc2", 20, _GAMMA, Identity(), _UP,
        description="size: skewed gamma responses, identical potentials"),
    _sc("t3.sc3", 20, _MIXTURE, Identity(), _UP, fixed_large_count=1,
        description="size: uniform mixture with rare large values"),
    _sc("t3.sc4", 20, _NORMAL, ShiftWithCenteredNoise(0.0, 3.0), _EUP_RAS,
        description="size: centered unit-level noise, equal means"),
    _sc("t3.sc5", 20, _GAMMA, ScaleAboutMean(2.0), _EUP_RAS,
        description="size: doubled spread about the mean, equal means"),
    _sc("t3.sc6", 20, _BERN, Identity(), _UP,
        fixed_y=fixed_binary_vectors(3, 6),
        description="size: binary responses, identical potentials"),
    Scenario(name="t3.sc7", n1=10, n2=10,
             law=CorrelatedBernoulliPair(0.28, 0.28, 0.37), effect=None,
             hypothesis_truth=_DUP_RAS, fixed_y=fixed_binary_vectors(3, 7),
             adjust_equal_means=True,
             description="size: correlated binary pair, equal margins"),
    # power suite, 10 per arm
    _sc("t4.sc1", 20, _NORMAL, Shift(2.0), (),
        description="power: constant shift 2"),
    _sc("t4.sc2", 20, _NORMAL, ShiftWithCenteredNoise(2.0, 3.0), (),
        description="power: shift 2 plus centered noise"),
    _sc("t4.sc3", 20, _NORMAL, Scale(1.2), (),
        description="power: scale 1.2"),
    _sc("t4.sc4", 20, _GAMMA, Scale(2.0), (),
        description="power: scale 2 on skewed responses"),
    _sc("t4.sc5", 20, _GAMMA, ScaleWithNoise(3.0, 5.0), (),
        description="power: scale 3 plus noise on skewed responses"),
    Scenario(name="t4.sc6", n1=10, n2=10,
             law=CorrelatedBernoulliPair(0.28, 0.71, 0.29), effect=None,
             fixed_y=fixed_binary_vectors(4, 6),
             description="power: correlated binary pair, unequal margins"),
    # size suite, 50 per arm
    _sc("t5.sc1", 100, _NORMAL, Identity(), _UP,
        description="size: normal responses, identical potentials"),
    _sc("t5.sc2", 100, _GAMMA, Identity(), _UP,
        description="size: skewed gamma responses, identical potentials"),
    _sc("t5.sc3", 100, _MIXTURE, Identity(), _UP, fixed_large_count=7,
        description="size: uniform mixture with rare large values"),
    _sc("t5.sc4", 100, _NORMAL, ShiftWithCenteredNoise(0.0, 3.0), _EUP_RAS,
        description="size: centered unit-level noise, equal means"),
    _sc("t5.sc5", 100, _GAMMA, ScaleAboutMean(2.0), _EUP_RAS,
        description="size: doubled spread about the mean, equal means"),
    # fixed tables below satisfy the documented margins/correlations:
    # 32/100 shared ones; means 33/100 each with corr 411/2211 = 0.186;
    # means 24/100 vs 45/100 with corr 820/sqrt(4514400) = 0.386
    _sc("t5.sc6", 100, _BERN, Identity(), _UP,
        fixed_y=_block_binary(100, 32, 0, 0),
        description="size: binary responses, identical potentials"),
    Scenario(name="t5.sc7", n1=50, n2=50,
             law=CorrelatedBernoulliPair(0.28, 0.28, 0.37), effect=None,
             hypothesis_truth=_DUP_RAS, fixed_y=_block_binary(100, 15, 18, 18),
             adjust_equal_means=True,
             description="size: correlated binary pair, equal margins"),
    # power suite, 50 per arm
    _sc("t6.sc1", 100, _NORMAL, Shift(1.0), (),
        description="power: constant shift 1"),
    _sc("t6.sc2", 100, _NORMAL, ShiftWithCenteredNoise(1.0, 3.0), (),
        description="power: shift 1 plus centered noise"),
    _sc("t6.sc3", 100, _NORMAL, Scale(1.1), (),
        description="power: scale 1.1"),
    _sc("t6.sc4", 100, _GAMMA, Scale(1.5), (),
        description="power: scale 1.5 on skewed responses"),
    _sc("t6.sc5", 100, _GAMMA, ScaleWithNoise(1.5, 5.0), (),
        description="power: scale 1.5 plus noise on skewed responses"),
    Scenario(name="t6.sc6", n1=50, n2=50,
             law=CorrelatedBernoulliPair(0.28, 0.50, 0.36), effect=None,
             fixed_y=_block_binary(100, 19, 5, 26),
             description="power: correlated binary pair, unequal margins"),
):
    SCENARIOS[_s.name] = _s


def known_scenarios() -> tuple:
    return tuple(SCENARIOS)


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}"
        ) from None


# Reference rejection rates (percent) for the built-in suites at 1000
# replicates, alpha 0.05; test order as DEFAULT_TEST_SUITE, None = NA.
REFERENCE_RATES: dict = {
    "t3.sc1": {"randomization": (4.6, 3.6, 4.7, 4.7, 4.6, 6.5),
               "process": (4.3, 3.4, 4.2, 4.3, 4.3, 6.9)},
    "t3.sc2": {"randomization": (5.0, 4.9, 4.1, 4.6, 5.0, 7.4),
               "process": (4.0, 4.1, 3.2, 3.5, 4.0, 7.7)},
    "t3.sc3": {"randomization": (4.6, 3.9, 0.0, 0.0, 4.6, 0.0),
               "process": (3.8, 3.5, 1.1, 1.8, 3.8, 11.2)},
    "t3.sc4": {"randomization": (1.5, 1.9, 1.7, 1.8, 1.5, 3.3),
               "process": (2.7, 2.0, 2.5, 2.6, 2.7, 4.2)},
    "t3.sc5": {"randomization": (4.8, 6.8, 4.3, 4.4, 4.8, 7.6),
               "process": (4.0, 7.4, 3.6, 3.7, 4.0, 7.4)},
    "t3.sc6": {"randomization": (0.0, None, 9.1, 9.1, 0.0, 9.1),
               "process": (2.1, None, 4.5, 4.5, 2.1, 11.3)},
    "t3.sc7": {"randomization": (0.4, None, 1.6, 1.6, 0.4, 4.6),
               "process": (0.2, None, 1.0, 1.0, 0.2, 3.7)},
    "t4.sc1": {"randomization": (52.7, 49.3, 51.3, 52.5, 52.7, 59.9),
               "process": (55.9, 51.6, 55.5, 56.1, 55.9, 62.7)},
    "t4.sc2": {"randomization": (26.2, 23.6, 24.1, 25.7, 26.2, 35.6),
               "process": (28.6, 23.8, 26.1, 27.2, 28.6, 36.6)},
    "t4.sc3": {"randomization": (34.7, 27.1, 34.8, 35.3, 34.7, 43.0),
               "process": (48.4, 43.0, 47.5, 48.4, 48.4, 57.2)},
    "t4.sc4": {"randomization": (19.2, 12.9, 16.1, 18.7, 19.2, 28.6),
               "process": (30.2, 23.7, 23.4, 26.0, 30.2, 38.5)},
    "t4.sc5": {"randomization": (45.7, 28.6, 40.2, 45.3, 45.7, 65.5),
               "process": (49.2, 38.1, 39.8, 44.4, 49.2, 63.5)},
    "t4.sc6": {"randomization": (18.9, None, 37.3, 37.3, 18.9, 37.4),
               "process": (29.6, None, 48.0, 48.0, 29.6, 50.3)},
    "t5.sc1": {"randomization": (4.0, 4.0, 4.0, 4.0, 4.0, 4.4),
               "process": (4.7, 4.8, 4.8, 4.8, 4.7, 5.5)},
    "t5.sc2": {"randomization": (4.9, 5.0, 4.8, 4.8, 4.9, 5.4),
               "process": (4.1, 3.9, 3.9, 3.9, 4.1, 4.8)},
    "t5.sc3": {"randomization": (4.2, 6.5, 4.3, 4.5, 4.2, 8.6),
               "process": (5.3, 5.4, 5.3, 5.3, 5.3, 6.6)},
    "t5.sc4": {"randomization": (2.5, 3.1, 2.4, 2.4, 2.5, 3.4),
               "process": (3.0, 4.6, 2.9, 3.2, 3.0, 3.9)},
    "t5.sc5": {"randomization": (4.6, 42.5, 4.4, 4.4, 4.6, 6.1),
               "process": (2.8, 35.1, 2.8, 2.8, 2.8, 5.0)},
    "t5.sc6": {"randomization": (2.2, None, 5.5, 5.5, 2.2, 5.5),
               "process": (3.5, None, 5.0, 5.0, 3.5, 5.9)},
    "t5.sc7": {"randomization": (0.5, None, 0.8, 0.8, 0.5, 1.0),
               "process": (1.6, None, 2.8, 2.8, 1.6, 3.5)},
    "t6.sc1": {"randomization": (80.9, 76.4, 80.4, 80.4, 80.9, 81.3),
               "process": (69.5, 67.7, 69.9, 69.9, 69.5, 70.4)},
    "t6.sc2": {"randomization": (36.3, 31.4, 36.2, 36.4, 36.3, 42.7),
               "process": (37.9, 36.3, 37.5, 38.0, 37.9, 42.8)},
    "t6.sc3": {"randomization": (70.5, 68.6, 71.0, 71.1, 70.5, 72.1),
               "process": (66.6, 63.9, 65.7, 65.7, 66.6, 67.4)},
    "t6.sc4": {"randomization": (46.6, 39.0, 46.2, 46.4, 46.6, 49.5),
               "process": (49.2, 40.6, 48.0, 48.2, 49.2, 51.8)},
    "t6.sc5": {"randomization": (41.0, 35.2, 40.4, 40.5, 41.0, 44.3),
               "process": (39.2, 30.7, 38.9, 39.0, 39.2, 44.2)},
    "t6.sc6": {"randomization": (48.8, None, 58.8, 58.8, 48.8, 60.3),
               "process": (51.1, None, 60.1, 60.1, 51.1, 60.3)},
}


# ------------------------------------------------------------ estimates


@dataclass(frozen=True)
class PowerEstimate:
    """Rejection rate of one test under one conditioning row, in percent."""

    test_name: str
    row: str
    rejection_rate: Optional[float]
    replicates: int
    mc_stderr: Optional[float]
    rejections: Optional[int]

    def __post_init__(self):
        if self.rejection_rate is not None and not (
            0.0 <= self.rejection_rate <= 100.0
        ):
            raise DataValidationError("rejection rate must lie in [0, 100]")

    def to_dict(self) -> dict:
        return {
            "test": self.test_name,
            "row": self.row,
            "rejection_rate": self.rejection_rate,
            "replicates": self.replicates,
            "mc_stderr": self.mc_stderr,
            "rejections": self.rejections,
        }


@lru_cache(maxsize=None)
def _binary_abs_tail(n: int, n1: int, m: int) -> tuple:
    """Exact two-sided p-values of the count statistic for every arm-1
    success count k, under uniform CRD with m total successes.

    The difference statistic is proportional to (k*n - m*n1), so the
    |statistic| ordering is an exact integer ordering and the tail mass
    is a ratio of binomial-coefficient sums; no roundoff enters.
    """
    n2 = n - n1
    k_lo = max(0, m - n2)
    k_hi = min(n1, m)
    weights = {
        k: math.comb(m, k) * math.comb(n - m, n1 - k) for k in range(k_lo, k_hi + 1)
    }
    total = math.comb(n, n1)
    out = {}
    for k0 in weights:
        c0 = abs(k0 * n - m * n1)
        numer = sum(w for k, w in weights.items() if abs(k * n - m * n1) >= c0)
        out[k0] = numer / total
    return (k_lo, tuple(out[k] for k in range(k_lo, k_hi + 1)))


def _binary_exact_pvalue(responses: np.ndarray, labels: np.ndarray, n1: int) -> float:
    n = len(responses)
    m = int(round(float(responses.sum())))
    k = int(round(float(responses[labels == 1].sum())))
    k_lo, table = _binary_abs_tail(n, n1, m)
    return table[k - k_lo]


@dataclass(frozen=True)
class _RowPlan:
    scenario: Scenario
    row: str
    design: UniformCRD
    sample: SampleVector
    weight_table: np.ndarray
    alpha: float
    tests: tuple
    master: RngStream
    mc_budget: int
    # exact-mode support cache; None means per-replicate Monte Carlo
    support: Optional[tuple] = None
    fixed_table: Optional[PotentialTable] = None
    fixed_assignment: Optional[AssignmentVector] = None


def _resampling_pvalues(plan: _RowPlan, responses, assignment, replicate: int):
    """p-values of the three resampling tests for one replicate.

    Matches the standalone test functions exactly: the batch comes from
    a fresh generator on substream (4, row, replicate), which is the
    same construction MonteCarloEngine applies, and both statistics are
    counted on one shared batch (their standalone runs would draw the
    identical batch from the identical stream anyway).
    """
    if plan.scenario.binary:
        p_d = _binary_exact_pvalue(responses, assignment.labels, plan.design.n1)
        return p_d, None
    d_obs = d_statistic(responses, assignment, plan.weight_table)
    coef, offset = _split_coefficients(responses, plan.weight_table)
    ranks = rank_midranks(responses)
    w_obs = rank_sum_statistic(ranks, assignment)
    if plan.support is not None:
        mask, probs = plan.support
        d_stats = mask @ coef + offset
        w_stats = mask @ ranks
        p_d = _support_tail_probs(d_stats, probs, d_obs)[0]
        _, up, lo = _support_tail_probs(w_stats, probs, w_obs)
        p_w = min(1.0, 2.0 * min(up, lo))
        return p_d, p_w
    row_code = 0 if plan.row == "randomization" else 1
    gen = plan.master.substream(4, row_code, replicate).generator()
    labels = sample_assignment_batch(plan.design, plan.mc_budget, gen)
    n_abs, _, _ = _batch_counts(labels, coef, offset, d_obs)
    _, n_up, n_lo = _batch_counts(labels, ranks, 0.0, w_obs)
    p_d = _addone(n_abs, plan.mc_budget)[0]
    p_up = _addone(n_up, plan.mc_budget)[0]
    p_lo = _addone(n_lo, plan.mc_budget)[0]
    p_w = min(1.0, 2.0 * min(p_up, p_lo))
    return p_d, p_w


def _closed_form_pvalue(kind: str, observed: ObservedExperiment, design) -> float:
    # degenerate draws (constant responses) cannot reject
    try:
        if kind == "welch_t":
            return welch_t_test(observed).p_value
        if kind == "pooled_t":
            return pooled_t_test(observed).p_value
        return neyman_randomization_test(observed, design).p_value
    except DegenerateDataError:
        return 1.0


def _one_replicate(plan: _RowPlan, replicate: int) -> np.ndarray:
    if plan.row == "randomization":
        assignment = sample_assignment(plan.design, plan.master.substream(2, replicate))
        table = plan.fixed_table
    else:
        table = generate_population(plan.scenario, plan.master.substream(3, replicate))
        assignment = plan.fixed_assignment
    responses = select_components(table, plan.sample, assignment)
    observed = ObservedExperiment(
        sample=plan.sample, assignment=assignment, responses=responses
    )
    p_d, p_w = _resampling_pvalues(plan, responses, assignment, replicate)
    out = np.zeros(len(plan.tests), dtype=np.int8)
    for i, test in enumerate(plan.tests):
        if test in ("permutation", "fisher_rand"):
            p = p_d
        elif test == "wilcoxon":
            if p_w is None:
                out[i] = -1
                continue
            p = p_w
        elif test in ("welch_t", "pooled_t", "neyman_rand"):
            p = _closed_form_pvalue(test, observed, plan.design)
        else:
            raise DataValidationError(f"unknown test name {test!r}")
        out[i] = 1 if p <= plan.alpha else 0
    return out


def run_size_power(
    scenario,
    test_suite: tuple = DEFAULT_TEST_SUITE,
    replicates: int = 1000,
    alpha: float = 0.05,
    rng: Optional[RngStream] = None,
    rows: tuple = ("randomization", "process"),
    threads: int = 1,
    mc_budget: Optional[int] = None,
    exact_small: bool = False,
) -> list:
    """Monte Carlo rejection rates for one scenario, both conditioning rows.

    mc_budget defaults to 10000 resamples per replicate for populations
    of 20 units and 4000 for larger ones. exact_small switches the
    resampling tests to full enumeration when the support fits the cap.
    Returns one PowerEstimate per (row, test), rows outermost.
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    if replicates < 100:
        raise DataValidationError("need at least 100 replicates")
    if not (0.0 < alpha <= 1.0):
        raise DataValidationError("alpha must lie in (0, 1]")
    for row in rows:
        if row not in ("randomization", "process"):
            raise DataValidationError(f"unknown row kind {row!r}")
    for test in test_suite:
        if test not in DEFAULT_TEST_SUITE:
            raise DataValidationError(f"unknown test name {test!r}")
    if rng is None:
        raise DataValidationError("a seeded RngStream is required")
    master = rng
    n = scenario.n_population
    design = UniformCRD(n, scenario.n1)
    sample = SampleVector.first_n(n)
    budget = mc_budget if mc_budget is not None else (10_000 if n <= 20 else 4_000)
    if budget > _MC_CHUNK:
        raise DataValidationError(f"per-replicate budget above {_MC_CHUNK} unsupported")
    support = None
    if exact_small and not scenario.binary:
        labels, probs = support_label_matrix(design)
        support = ((labels == 1).astype(np.float64), probs)
    probe = AssignmentVector.two_arms(scenario.n1, scenario.n2)
    weight_table = resolve_weights(ArmSizeWeights(), sample, probe)

    estimates: list = []
    for row in rows:
        plan = _RowPlan(
            scenario=scenario,
            row=row,
            design=design,
            sample=sample,
            weight_table=weight_table,
            alpha=alpha,
            tests=tuple(test_suite),
            master=master,
            mc_budget=budget,
            support=support,
            fixed_table=(
                draw_fixed_population(scenario, master)
                if row == "randomization"
                else None
            ),
            fixed_assignment=(
                sample_assignment(design, master.substream(1, 0))
                if row == "process"
                else None
            ),
        )
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(lambda r: _one_replicate(plan, r), range(replicates))
                )
        else:
            results = [_one_replicate(plan, r) for r in range(replicates)]
        stacked = np.vstack(results)
        for i, test in enumerate(plan.tests):
            column = stacked[:, i]
            if np.any(column < 0):
                estimates.append(
                    PowerEstimate(
                        test_name=test, row=row, rejection_rate=None,
                        replicates=replicates, mc_stderr=None, rejections=None,
                    )
                )
                continue
            rejections = int(column.sum())
            rate = 100.0 * rejections / replicates
            stderr = math.sqrt(rate * (100.0 - rate) / replicates)
            estimates.append(
                PowerEstimate(
                    test_name=test, row=row, rejection_rate=rate,
                    replicates=replicates, mc_stderr=stderr, rejections=rejections,
                )
            )
    return estimates


# ------------------------------------------------------- scenario files


_LAW_KINDS = {
    "normal": (Normal, ("mean", "sd")),
    "gamma": (GammaLaw, ("shape", "scale")),
    "uniform_mixture": (UniformMixture, ("weight", "lo1", "hi1", "lo2", "hi2")),
    "bernoulli": (Bernoulli, ("p",)),
    "correlated_bernoulli_pair": (
        CorrelatedBernoulliPair,
        ("p1", "p2", "correlation"),
    ),
}

_EFFECT_KINDS = {
    "identity": (Identity, ()),
    "shift": (Shift, ("delta",)),
    "shift_centered_noise": (ShiftWithCenteredNoise, ("delta", "sd")),
    "scale": (Scale, ("factor",)),
    "scale_about_mean": (ScaleAboutMean, ("factor",)),
    "scale_noise": (ScaleWithNoise, ("factor", "sd")),
}


def _build_from_spec(table, kinds, what):
    if not isinstance(table, dict) or "kind" not in table:
        raise DataValidationError(f"{what} must be a mapping with a 'kind' key")
    kind = table["kind"]
    if kind not in kinds:
        raise DataValidationError(
            f"unknown {what} kind {kind!r}; known: {', '.join(kinds)}"
        )
    cls, params = kinds[kind]
    extra = set(table) - {"kind"} - set(params)
    if extra:
        raise DataValidationError(f"unknown {what} parameters: {sorted(extra)}")
    missing = [p for p in params if p not in table]
    if missing:
        raise DataValidationError(f"{what} {kind!r} missing parameters: {missing}")
    return cls(**{p: table[p] for p in params})


def _toml_subset_loads(text, path):
    """Flat-table TOML subset: [section] headers plus key = value lines.

    Fallback for interpreters without tomllib. Values use the JSON-compatible
    slice of TOML syntax (double-quoted strings, decimal numbers, booleans,
    one-line arrays), which covers every file this package defines.
    """
    doc: dict = {}
    current = doc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if not name or "[" in name or "]" in name:
                raise DataValidationError(
                    f"{path}: line {lineno}: unsupported table header"
                )
            current = doc.setdefault(name, {})
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise DataValidationError(
                f"{path}: line {lineno}: expected 'key = value'"
            )
        candidates = [value]
        if "#" in value:
            candidates.append(value.split("#", 1)[0].strip())
        for candidate in candidates:
            try:
                current[key] = json.loads(candidate)
                break
            except json.JSONDecodeError:
                continue
        else:
            raise DataValidationError(
                f"{path}: line {lineno}: unsupported value syntax {value!r}"
            )
    return doc


def load_scenario_file(path) -> Scenario:
    """A scenario from a declarative JSON or TOML key-value file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataValidationError(f"{path}: not valid UTF-8: {exc}") from exc
        try:
            import tomllib
        except ModuleNotFoundError:
            doc = _toml_subset_loads(text, path)
        else:
            try:
                doc = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                raise DataValidationError(f"{path}: invalid TOML: {exc}") from exc
    else:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataValidationError(f"{path}: top level must be a mapping")
    try:
        name = doc["name"]
        n1 = int(doc["n1"])
        n2 = int(doc["n2"])
        law = _build_from_spec(doc["law"], _LAW_KINDS, "law")
    except KeyError as exc:
        raise DataValidationError(f"{path}: missing required key {exc}") from None
    effect = None
    if "effect" in doc:
        effect = _build_from_spec(doc["effect"], _EFFECT_KINDS, "effect")
    truth = tuple(Hypothesis(tag) for tag in doc.get("hypothesis_truth", ()))
    fixed_y = None
    if "fixed_y" in doc:
        block = doc["fixed_y"]
        if not isinstance(block, dict) or "y1" not in block or "y2" not in block:
            raise DataValidationError(f"{path}: fixed_y needs 'y1' and 'y2' arrays")
        fixed_y = _table(block["y1"], block["y2"])
    return Scenario(
        name=name,
        n1=n1,
        n2=n2,
        law=law,
        effect=effect,
        hypothesis_truth=truth,
        fixed_y=fixed_y,
        fixed_large_count=doc.get("fixed_large_count"),
        adjust_equal_means=bool(doc.get("adjust_equal_means", False)),
        description=doc.get("description", ""),
    )
