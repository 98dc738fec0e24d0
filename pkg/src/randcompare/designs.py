"""Assignment and selection designs: the known distributions behind
randomization- and selection-based inference.

An assignment design is the distribution of the treatment-label vector
T given the sample; a selection design is the joint distribution of
(sample, assignment). Tests consume these through three views: first-order
inclusion probabilities, full-support enumeration, and seeded sampling.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .core import AssignmentVector, SampleVector
from .errors import (
    DataValidationError,
    DesignInvalidError,
    EnumerationTooLargeError,
)

ENUMERATION_CAP = 2_000_000

# Counter-based generator: substreams derived from (seed, spawn_key) are
# statistically independent and reproducible regardless of thread timing.
RNG_ALGORITHM = "philox4x64"


@dataclass(frozen=True)
class RngStream:
    """A named position in the seeded random-number stream tree.

    ``generator()`` always returns a generator at the start of this
    stream, so one stream should have one consumer. Parallel work takes
    ``substream(...)`` handles derived from (seed, key) instead of sharing
    a generator.
    """

    seed: int
    spawn_key: tuple = ()

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise DataValidationError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "spawn_key", tuple(int(k) for k in self.spawn_key))

    @property
    def algorithm(self) -> str:
        return RNG_ALGORITHM

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.spawn_key)
        return np.random.Generator(np.random.Philox(seq))

    def substream(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.spawn_key + tuple(key))


def binomial_coefficient(n: int, k: int) -> int:
    """Exact C(n, k); refuses values that do not fit in 128 bits."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"binomial coefficient undefined for n={n}, k={k}")
    value = math.comb(n, k)
    if value.bit_length() > 128:
        raise EnumerationTooLargeError(
            f"C({n}, {k}) exceeds 128-bit representation", size=None, cap=None
        )
    return value


class AssignmentDesign:
    """Marker base class for assignment designs (see UniformCRD, Explicit)."""

    n: int


@dataclass(frozen=True)
class UniformCRD(AssignmentDesign):
    """Completely randomized design: uniform over all rearrangements of
    n1 ones and n2 twos."""

    n: int
    n1: int

    def __post_init__(self):
        if not (1 <= self.n1 <= self.n - 1):
            raise DesignInvalidError(
                "UniformCRD needs 1 <= n1 <= n-1 so both arms have positive "
                "inclusion probability"
            )

    @property
    def n2(self) -> int:
        return self.n - self.n1

    @property
    def support_size(self) -> int:
        return binomial_coefficient(self.n, self.n1)


@dataclass(frozen=True)
class Explicit(AssignmentDesign):
    """Assignment design given by its full support and probabilities."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        support = tuple(
            v if isinstance(v, AssignmentVector) else AssignmentVector(v)
            for v in self.support
        )
        if not support:
            raise DesignInvalidError("explicit design needs a nonempty support")
        n = support[0].n
        if any(v.n != n for v in support):
            raise DesignInvalidError("support vectors must all have equal length")
        labels = np.stack([v.labels for v in support])
        if len(np.unique(labels, axis=0)) != len(support):
            raise DesignInvalidError("support vectors must be distinct")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (len(support),):
            raise DesignInvalidError("probs must align with the support")
        if np.any(probs < 0):
            raise DesignInvalidError("probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise DesignInvalidError("probabilities must sum to 1 within 1e-12")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_labels", labels)

    @property
    def n(self) -> int:
        return self.support[0].n

    @property
    def support_size(self) -> int:
        return len(self.support)

    def label_matrix(self) -> np.ndarray:
        return self._labels


def explicit_from_json(doc) -> Explicit:
    """Build an Explicit design from {"support": [[1,2,...],...], "probs": [...]}.

    Accepts a parsed document, a JSON string, or a path to a JSON file.
    """
    if isinstance(doc, os.PathLike):
        with open(doc, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    elif isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError:
            with open(doc, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
    if not isinstance(doc, dict) or "support" not in doc or "probs" not in doc:
        raise DataValidationError(
            'explicit design document must have "support" and "probs" keys'
        )
    support = tuple(AssignmentVector(np.asarray(v)) for v in doc["support"])
    return Explicit(support=support, probs=np.asarray(doc["probs"], float))


def first_order_inclusion(design: AssignmentDesign, t: int, j: int) -> float:
    """P(position j receives treatment t) under the design; j is 1-based."""
    if t not in (1, 2):
        raise DataValidationError("treatment label must be 1 or 2")
    if not (1 <= j <= design.n):
        raise DataValidationError(f"position {j} outside 1..{design.n}")
    if isinstance(design, UniformCRD):
        n_t = design.n1 if t == 1 else design.n2
        return n_t / design.n
    if isinstance(design, Explicit):
        pi = float(design.probs[design.label_matrix()[:, j - 1] == t].sum())
        if pi <= 0.0:
            raise DesignInvalidError(
                f"zero inclusion probability for treatment {t} at position {j}"
            )
        return pi
    raise DataValidationError(f"unknown design type {type(design).__name__}")


def inclusion_table(design: AssignmentDesign) -> np.ndarray:
    """(2, n) table of first-order inclusion probabilities.

    Unlike first_order_inclusion this does not raise on zeros; callers
    that need strict positivity check it themselves.
    """
    if isinstance(design, UniformCRD):
        table = np.empty((2, design.n))
        table[0, :] = design.n1 / design.n
        table[1, :] = design.n2 / design.n
        return table
    if isinstance(design, Explicit):
        labels = design.label_matrix()
        table = np.empty((2, design.n))
        table[0, :] = design.probs @ (labels == 1)
        table[1, :] = design.probs @ (labels == 2)
        return table
    raise DataValidationError(f"unknown design type {type(design).__name__}")


def check_both_arm_inclusion(design: AssignmentDesign) -> None:
    """Raise unless every position can receive either treatment."""
    table = inclusion_table(design)
    if np.any(table <= 0.0):
        t, j = np.argwhere(table <= 0.0)[0]
        raise DesignInvalidError(
            f"design gives treatment {int(t) + 1} zero inclusion probability "
            f"at position {int(j) + 1}; randomization tests need every unit "
            "to be assignable to both arms"
        )


def enumerate_support(design: AssignmentDesign, cap: int = ENUMERATION_CAP):
    """Yield every (AssignmentVector, probability) support point once."""
    size = design.support_size
    if size > cap:
        raise EnumerationTooLargeError(
            f"support size {size} exceeds enumeration cap {cap}; "
            "use a Monte Carlo engine instead",
            size=size,
            cap=cap,
        )
    if isinstance(design, UniformCRD):
        prob = 1.0 / size
        for ones in itertools.combinations(range(design.n), design.n1):
            labels = np.full(design.n, 2, dtype=np.int8)
            labels[list(ones)] = 1
            yield AssignmentVector(labels), prob
        return
    if isinstance(design, Explicit):
        for vec, prob in zip(design.support, design.probs):
            yield vec, float(prob)
        return
    raise DataValidationError(f"unknown design type {type(design).__name__}")


def support_label_matrix(design: AssignmentDesign, cap: int = ENUMERATION_CAP):
    """(labels (M, n) int8, probs (M,)) for vectorized exact engines."""
    size = design.support_size
    if size > cap:
        raise EnumerationTooLargeError(
            f"support size {size} exceeds enumeration cap {cap}",
            size=size,
            cap=cap,
        )
    if isinstance(design, Explicit):
        return design.label_matrix(), np.asarray(design.probs)
    ones = np.fromiter(
        itertools.chain.from_iterable(
            itertools.combinations(range(design.n), design.n1)
        ),
        dtype=np.intp,
        count=size * design.n1,
    ).reshape(size, design.n1)
    labels = np.full((size, design.n), 2, dtype=np.int8)
    np.put_along_axis(labels, ones, 1, axis=1)
    probs = np.full(size, 1.0 / size)
    return labels, probs


def _crd_template(design: UniformCRD) -> np.ndarray:
    return np.concatenate(
        [np.ones(design.n1, np.int8), np.full(design.n2, 2, np.int8)]
    )


def sample_assignment(design: AssignmentDesign, rng: RngStream) -> AssignmentVector:
    """One seeded draw from the design (Fisher-Yates shuffle for CRD)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if isinstance(design, UniformCRD):
        return AssignmentVector(gen.permutation(_crd_template(design)))
    if isinstance(design, Explicit):
        idx = int(gen.choice(len(design.support), p=design.probs))
        return design.support[idx]
    raise DataValidationError(f"unknown design type {type(design).__name__}")


def sample_assignment_batch(
    design: AssignmentDesign, size: int, gen: np.random.Generator
) -> np.ndarray:
    """(size, n) int8 label matrix of independent draws.

    Row-wise Fisher-Yates for CRD; categorical support lookup otherwise.
    """
    if isinstance(design, UniformCRD):
        batch = np.tile(_crd_template(design), (size, 1))
        return gen.permuted(batch, axis=1)
    if isinstance(design, Explicit):
        idx = gen.choice(len(design.support), size=size, p=design.probs)
        return design.label_matrix()[idx]
    raise DataValidationError(f"unknown design type {type(design).__name__}")


class SelectionDesign:
    """Marker base class for joint (sample, assignment) designs."""


@dataclass(frozen=True)
class CensusCRD(SelectionDesign):
    """The whole population is sampled with probability one and then
    assigned by a uniform CRD; selection inference reduces to
    randomization inference."""

    n_population: int
    n1: int

    def __post_init__(self):
        if not (1 <= self.n1 <= self.n_population - 1):
            raise DesignInvalidError("CensusCRD needs 1 <= n1 <= N-1")

    @property
    def n2(self) -> int:
        return self.n_population - self.n1

    def assignment_design(self) -> UniformCRD:
        return UniformCRD(n=self.n_population, n1=self.n1)


@dataclass(frozen=True)
class ExplicitJoint(SelectionDesign):
    """Joint design given by its support of (sample, assignment) pairs."""

    n_population: int
    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        if not support:
            raise DesignInvalidError("explicit joint design needs a nonempty support")
        for s, t in support:
            if not isinstance(s, SampleVector) or not isinstance(t, AssignmentVector):
                raise DesignInvalidError(
                    "support points must be (SampleVector, AssignmentVector) pairs"
                )
            if s.n != t.n:
                raise DesignInvalidError("sample and assignment lengths must match")
            if np.any(s.indices > self.n_population):
                raise DesignInvalidError("sample indices exceed the population size")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (len(support),):
            raise DesignInvalidError("probs must align with the support")
        if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > 1e-12:
            raise DesignInvalidError("probabilities must be nonnegative and sum to 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)


def joint_first_order_inclusion(design: SelectionDesign, t: int, unit: int) -> float:
    """P(unit enters the sample and receives treatment t)."""
    if t not in (1, 2):
        raise DataValidationError("treatment label must be 1 or 2")
    if isinstance(design, CensusCRD):
        if not (1 <= unit <= design.n_population):
            raise DataValidationError(f"unit {unit} outside 1..{design.n_population}")
        n_t = design.n1 if t == 1 else design.n2
        return n_t / design.n_population
    if isinstance(design, ExplicitJoint):
        if not (1 <= unit <= design.n_population):
            raise DataValidationError(f"unit {unit} outside 1..{design.n_population}")
        total = 0.0
        for (s, tv), prob in zip(design.support, design.probs):
            hit = (s.indices == unit) & (tv.labels == t)
            if np.any(hit):
                total += float(prob)
        if total <= 0.0:
            raise DesignInvalidError(
                f"zero joint inclusion probability for treatment {t}, unit {unit}"
            )
        return total
    raise DataValidationError(f"unknown design type {type(design).__name__}")


def reduces_to_census(design: SelectionDesign) -> CensusCRD | None:
    """CensusCRD equivalent of the design, or None if there is none.

    An ExplicitJoint qualifies when every support sample is the full
    population and the assignment marginal is uniform over all
    rearrangements with a common arm-1 size.
    """
    if isinstance(design, CensusCRD):
        return design
    if not isinstance(design, ExplicitJoint):
        return None
    n = design.n_population
    full = set(range(1, n + 1))
    n1 = None
    assignment_probs: dict = {}
    for (s, t), prob in zip(design.support, design.probs):
        if s.n != n or set(int(i) for i in s.indices) != full:
            return None
        # Re-express labels in unit order so permuted samples compare equal.
        by_unit = np.empty(n, dtype=np.int8)
        by_unit[s.indices - 1] = t.labels
        if n1 is None:
            n1 = int(np.sum(by_unit == 1))
        elif int(np.sum(by_unit == 1)) != n1:
            return None
        key = by_unit.tobytes()
        assignment_probs[key] = assignment_probs.get(key, 0.0) + float(prob)
    if n1 is None or not (1 <= n1 <= n - 1):
        return None
    expected = binomial_coefficient(n, n1)
    if len(assignment_probs) != expected:
        return None
    uniform = 1.0 / expected
    if any(abs(p - uniform) > 1e-9 for p in assignment_probs.values()):
        return None
    return CensusCRD(n_population=n, n1=n1)
