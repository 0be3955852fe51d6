"""Information carried by fuzzy-set messages.

A message ``y_j`` is represented only by its truth function, the membership
degrees ``Q(A_j|x)`` over the event alphabet. Inverting a truth function
against a prior with Bayes' rule gives the semantic posterior ``Q(x|A_j)``,
and the log-ratio of that posterior to the prior is the information the
message conveys about an event.

Pointwise values (``semantic_info``) use the raw degrees and may return
``-inf``. Every averaged quantity first clamps degrees into ``[epsilon, 1]``
so that aggregates stay finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core_prob import MINUS_INF, Alphabet, Distribution, as_probs
from .errors import (
    ClosedFormUnavailableError,
    GeninfoError,
    InvalidWidthError,
    NoAdmissibleCandidateError,
    NullLogicalProbabilityError,
)

DEFAULT_EPSILON = 1e-9
LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class TruthFunction:
    """Membership degrees Q(A_j|x) in [0, 1] over an alphabet.

    ``center`` and ``width`` are set only for Gaussian-generated functions.
    """

    degrees: np.ndarray
    alphabet: Alphabet | None = None
    center: float | None = None
    width: float | None = None
    name: str | None = None

    def __post_init__(self):
        t = np.array(self.degrees, dtype=float).reshape(-1)
        if t.size == 0:
            raise GeninfoError("truth function must be non-empty")
        if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            raise GeninfoError("truth degrees must lie in [0, 1]")
        if not np.any(t > 0):
            raise GeninfoError("truth function has no positive degree")
        t.setflags(write=False)
        object.__setattr__(self, "degrees", t)
        if self.alphabet is not None and len(self.alphabet) != t.size:
            raise GeninfoError("truth function and alphabet differ in size")

    @property
    def is_gaussian(self) -> bool:
        return self.center is not None and self.width is not None

    def __len__(self) -> int:
        return self.degrees.size

    def clamped(self, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
        return np.clip(self.degrees, epsilon, 1.0)


class SemanticChannel(Sequence):
    """Ordered family of truth functions (one per message) on a shared alphabet."""

    def __init__(self, messages: Iterable[TruthFunction]):
        messages = [m if isinstance(m, TruthFunction) else TruthFunction(m) for m in messages]
        if not messages:
            raise GeninfoError("semantic channel needs at least one message")
        n = len(messages[0])
        for m in messages:
            if len(m) != n:
                raise GeninfoError("all truth functions must share one alphabet")
        alphabets = {id(m.alphabet): m.alphabet for m in messages if m.alphabet is not None}
        first = next(iter(alphabets.values()), None)
        if any(a != first for a in alphabets.values()):
            raise GeninfoError("all truth functions must share one alphabet")
        self._messages = tuple(messages)

    def __getitem__(self, j):
        return self._messages[j]

    def __len__(self) -> int:
        return len(self._messages)

    @property
    def degrees(self) -> np.ndarray:
        """Matrix of degrees, rows are events and columns are messages."""
        return np.column_stack([m.degrees for m in self._messages])

    def clamped(self, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
        return np.clip(self.degrees, epsilon, 1.0)


def _degrees(truth) -> np.ndarray:
    if isinstance(truth, TruthFunction):
        return truth.degrees
    return np.asarray(truth, dtype=float)


def _check_aligned(prior: np.ndarray, degrees: np.ndarray):
    if prior.shape != degrees.shape:
        raise GeninfoError(
            f"prior has {prior.size} events but truth function has {degrees.size}"
        )


def logical_probability(prior, truth) -> float:
    """Q(A_j) = sum_i P(x_i) Q(A_j|x_i)."""
    p, t = as_probs(prior), _degrees(truth)
    _check_aligned(p, t)
    q = float(p @ t)
    if q <= 0:
        raise NullLogicalProbabilityError(
            "null logical probability: the message is false on every possible event"
        )
    return q


def semantic_posterior(prior, truth) -> Distribution:
    p, t = as_probs(prior), _degrees(truth)
    q = logical_probability(p, t)
    return Distribution(t * p / q)


def semantic_info(prior, truth, event_index: int) -> float:
    """Generalized information log2[Q(A_j|x_i) / Q(A_j)] of one event, in bits.

    Returns ``MINUS_INF`` when the message is plainly false of the event.
    """
    p, t = as_probs(prior), _degrees(truth)
    if not 0 <= event_index < p.size:
        raise IndexError(f"event index {event_index} out of range")
    if p[event_index] <= 0:
        raise GeninfoError("event has zero prior probability")
    q = logical_probability(p, t)
    if t[event_index] == 0:
        return MINUS_INF
    return math.log2(t[event_index] / q)


def gaussian_truth(alphabet: Alphabet, center: float, width: float) -> TruthFunction:
    if not width > 0:
        raise InvalidWidthError(f"invalid width: {width!r} (must be > 0)")
    if alphabet.values is None:
        raise GeninfoError("Gaussian truth function needs an alphabet with numeric values")
    degrees = np.exp(-((alphabet.values - center) ** 2) / (2.0 * width**2))
    return TruthFunction(degrees, alphabet, float(center), float(width))


def semantic_info_gaussian(prior, truth: TruthFunction, event_index: int) -> float:
    """Closed form: squared-error term (in bits) minus log2 Q(A_j)."""
    if not isinstance(truth, TruthFunction) or not truth.is_gaussian:
        raise ClosedFormUnavailableError("closed form unavailable for a non-Gaussian truth function")
    if truth.alphabet is None or truth.alphabet.values is None:
        raise ClosedFormUnavailableError("closed form needs alphabet values")
    x = truth.alphabet.values[event_index]
    q = logical_probability(prior, truth)
    return -((x - truth.center) ** 2) / (2.0 * truth.width**2 * LN2) - math.log2(q)


def _clamped_posterior(p, truth, epsilon):
    # posterior from clamped degrees; raw Q(A_j) must still be positive
    logical_probability(p, truth)
    t = np.clip(_degrees(truth), epsilon, 1.0)
    _check_aligned(p, t)
    q = float(p @ t)
    return t, q


def generalized_kullback(evidence, prior, truth, epsilon: float = DEFAULT_EPSILON) -> float:
    """Evidence-averaged information sum_i P(x_i|z) log2[Q(A_j|x_i)/Q(A_j)]."""
    e, p = as_probs(evidence), as_probs(prior)
    t, q = _clamped_posterior(p, truth, epsilon)
    _check_aligned(e, t)
    mask = e > 0
    return float(np.sum(e[mask] * np.log2(t[mask] / q)))


def generalized_cond_entropy(evidence, prior, truth, epsilon: float = DEFAULT_EPSILON) -> float:
    """Cross-entropy -sum_i P(x_i|z) log2 Q(x_i|A_j) of evidence against the posterior."""
    e, p = as_probs(evidence), as_probs(prior)
    t, q = _clamped_posterior(p, truth, epsilon)
    _check_aligned(e, t)
    mask = e > 0
    if np.any(p[mask] <= 0):
        # the posterior inherits the prior's zeros
        return math.inf
    post = t[mask] * p[mask] / q
    return float(-np.sum(e[mask] * np.log2(post)))


def select_best(candidates, evidence, prior, epsilon: float = DEFAULT_EPSILON):
    """Pick the message with the largest generalized Kullback score.

    Returns ``(index, scores)``. Candidates with null logical probability score
    ``-inf``; ties go to the lowest index.
    """
    candidates = candidates if isinstance(candidates, SemanticChannel) else SemanticChannel(candidates)
    scores = np.empty(len(candidates))
    for j, truth in enumerate(candidates):
        try:
            scores[j] = generalized_kullback(evidence, prior, truth, epsilon)
        except NullLogicalProbabilityError:
            scores[j] = MINUS_INF
    if np.all(np.isneginf(scores)):
        raise NoAdmissibleCandidateError("no admissible candidate: every message is null under the prior")
    return int(np.argmax(scores)), scores


def translate_select(source_truth, prior, candidates, epsilon: float = DEFAULT_EPSILON):
    evidence = semantic_posterior(prior, source_truth)
    return select_best(candidates, evidence, prior, epsilon)
