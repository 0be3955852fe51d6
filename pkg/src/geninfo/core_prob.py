"""Finite-alphabet probability types and classical information quantities.

All logarithms are base 2, so every information value is in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AbsoluteContinuityError,
    DegenerateWeightsError,
    GeninfoError,
    InvalidWeightError,
    UndefinedPriorError,
)

# log 0 for pointwise information values; entropies never return it
MINUS_INF = -math.inf

PROB_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Ordered set of event labels, optionally carrying numeric positions."""

    labels: tuple[str, ...]
    values: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 1:
            raise GeninfoError("alphabet must contain at least one label")
        if len(set(labels)) != len(labels):
            raise GeninfoError("alphabet labels must be unique")
        object.__setattr__(self, "labels", labels)
        if self.values is not None:
            values = _frozen(self.values)
            if values.shape != (len(labels),):
                raise GeninfoError(
                    f"alphabet has {len(labels)} labels but {values.size} values"
                )
            if not np.all(np.isfinite(values)):
                raise GeninfoError("alphabet values must be finite")
            object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float], labels: Sequence[str] | None = None) -> Alphabet:
        values = np.asarray(values, dtype=float)
        if labels is None:
            labels = [format(v, "g") for v in values]
        return cls(tuple(labels), values)

    @classmethod
    def of_size(cls, n: int) -> Alphabet:
        return cls(tuple(f"x{i + 1}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Alphabet):
            return NotImplemented
        if self.labels != other.labels:
            return False
        if (self.values is None) != (other.values is None):
            return False
        return self.values is None or bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash(self.labels)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over an alphabet.

    Entries must be nonnegative and sum to one within ``1e-9``; the stored
    vector is renormalized exactly after validation.
    """

    probs: np.ndarray
    alphabet: Alphabet | None = None

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise GeninfoError("distribution must be non-empty")
        if not np.all(np.isfinite(p)):
            raise GeninfoError("distribution entries must be finite")
        if np.any(p < 0):
            raise GeninfoError("distribution has a negative entry")
        total = p.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise GeninfoError(f"distribution sums to {total:.12g}, not 1")
        object.__setattr__(self, "probs", _frozen(p / total))
        if self.alphabet is not None and len(self.alphabet) != p.size:
            raise GeninfoError(
                f"distribution has {p.size} entries, alphabet has {len(self.alphabet)}"
            )

    def __len__(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __getitem__(self, i):
        return self.probs[i]

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional distribution P(y|x); row i is the output law for input i."""

    matrix: np.ndarray

    def __post_init__(self):
        w = np.array(self.matrix, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise GeninfoError("channel must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise GeninfoError("channel entries must be finite and nonnegative")
        sums = w.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL)
        if bad.size:
            raise GeninfoError(f"channel row {bad[0]} sums to {sums[bad[0]]:.12g}, not 1")
        object.__setattr__(self, "matrix", _frozen(w / sums[:, None]))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def rows(self) -> list[Distribution]:
        return [Distribution(r) for r in self.matrix]

    def output(self, source) -> np.ndarray:
        return as_probs(source) @ self.matrix


def as_probs(p) -> np.ndarray:
    """Return the raw probability vector of a Distribution or array-like."""
    if isinstance(p, Distribution):
        return p.probs
    return np.asarray(p, dtype=float)


def as_matrix(w) -> np.ndarray:
    if isinstance(w, Channel):
        return w.matrix
    return np.asarray(w, dtype=float)


def normalize(weights) -> Distribution:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidWeightError("invalid weight: entries must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise DegenerateWeightsError("degenerate weights: all entries are zero")
    return Distribution(w / total)


def shannon_info(p_prior: float, p_posterior: float) -> float:
    """Classical information log2(posterior / prior) in bits."""
    if p_prior <= 0:
        raise UndefinedPriorError("undefined prior: prior probability must be positive")
    if p_posterior < 0:
        raise InvalidWeightError("posterior probability must be nonnegative")
    if p_posterior == 0:
        return MINUS_INF
    return math.log2(p_posterior / p_prior)


def entropy(p) -> float:
    p = as_probs(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def kl_divergence(p, q) -> float:
    p, q = as_probs(p), as_probs(q)
    if p.shape != q.shape:
        raise GeninfoError("distributions are over different alphabets")
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise AbsoluteContinuityError(
            "absolute-continuity: q vanishes where p has mass"
        )
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def cross_entropy(p, q) -> float:
    """-sum p log2 q, with the same support rules as kl_divergence."""
    p, q = as_probs(p), as_probs(q)
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise AbsoluteContinuityError(
            "absolute-continuity: q vanishes where p has mass"
        )
    return float(-np.sum(p[mask] * np.log2(q[mask])))


def shannon_mutual_info(source, channel) -> float:
    p = as_probs(source)
    w = as_matrix(channel)
    if w.shape[0] != p.size:
        raise GeninfoError("channel rows do not match the source alphabet")
    joint = p[:, None] * w
    q = joint.sum(axis=0)
    mask = joint > 0
    ratio = w[mask] / np.broadcast_to(q, w.shape)[mask]
    return max(float(np.sum(joint[mask] * np.log2(ratio))), 0.0)
