"""Generalized mutual information and the four generalized entropies.

A :class:`SemanticSystem` couples the objective side (source ``P(X)`` and
channel ``P(Y|X)``) with the subjective side (forecast ``Q(X)`` and one truth
function per message). Semantic posteriors are always inverted against the
objective source, while the forecast only enters ``H(X)`` and the
denominator of the generalized mutual information. With ``Q = P``

    I = H(X) - H(X|Y) = H(Y) - H(Y|X);

otherwise the two differences are apart by exactly KL(P || Q).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_prob import Channel, Distribution, as_probs, cross_entropy
from .errors import AbsoluteContinuityError, GeninfoError, NullLogicalProbabilityError
from .semantic import DEFAULT_EPSILON, SemanticChannel


@dataclass(frozen=True, eq=False)
class SemanticSystem:
    source: Distribution
    forecast: Distribution
    channel: Channel
    semantics: SemanticChannel
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for name in ("source", "forecast"):
            val = getattr(self, name)
            if not isinstance(val, Distribution):
                object.__setattr__(self, name, Distribution(val))
        if not isinstance(self.channel, Channel):
            object.__setattr__(self, "channel", Channel(self.channel))
        if not isinstance(self.semantics, SemanticChannel):
            object.__setattr__(self, "semantics", SemanticChannel(self.semantics))
        n = len(self.source)
        if len(self.forecast) != n or len(self.semantics[0]) != n:
            raise GeninfoError("source, forecast and semantics must share the event alphabet")
        if self.channel.shape != (n, len(self.semantics)):
            raise GeninfoError(
                f"channel shape {self.channel.shape} does not match "
                f"{n} events x {len(self.semantics)} messages"
            )
        if np.any(self.forecast.probs[self.source.support] <= 0):
            raise AbsoluteContinuityError(
                "absolute-continuity: forecast vanishes where the source has mass"
            )

    @classmethod
    def matched(cls, source, channel, semantics, epsilon: float = DEFAULT_EPSILON):
        """System whose subjective forecast equals the source."""
        source = source if isinstance(source, Distribution) else Distribution(source)
        return cls(source, source, channel, semantics, epsilon)

    @property
    def joint(self) -> np.ndarray:
        return self.source.probs[:, None] * self.channel.matrix

    @property
    def output(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def truth_matrix(self) -> np.ndarray:
        return self.semantics.clamped(self.epsilon)

    def logical_probabilities(self) -> np.ndarray:
        """Q(A_j) from clamped degrees; raises if a used message is null."""
        p = self.source.probs
        raw = p @ self.semantics.degrees
        bad = np.flatnonzero((raw <= 0) & (self.output > 0))
        if bad.size:
            raise NullLogicalProbabilityError(
                f"null logical probability for message {bad[0]} with positive output probability"
            )
        return p @ self.truth_matrix()

    def semantic_posteriors(self) -> np.ndarray:
        """Matrix of Q(x_i|A_j); column j is the posterior of message j."""
        t = self.truth_matrix()
        return self.source.probs[:, None] * t / self.logical_probabilities()


def _joint_log_sum(joint: np.ndarray, values: np.ndarray) -> float:
    mask = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.sum(joint[mask] * np.log2(values[mask])))


def forecasting_entropy(system: SemanticSystem) -> float:
    return cross_entropy(system.source, system.forecast)


def posterior_forecasting_entropy(system: SemanticSystem) -> float:
    return -_joint_log_sum(system.joint, system.semantic_posteriors())


def generalized_entropy_Y(system: SemanticSystem) -> float:
    py = system.output
    qa = system.logical_probabilities()
    mask = py > 0
    return float(-np.sum(py[mask] * np.log2(qa[mask])))


def fuzzy_entropy(system: SemanticSystem) -> float:
    return -_joint_log_sum(system.joint, system.truth_matrix())


def generalized_mutual_info(system: SemanticSystem) -> float:
    post = system.semantic_posteriors()
    q = as_probs(system.forecast)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = post / q[:, None]
    return _joint_log_sum(system.joint, ratio)


def all_quantities(system: SemanticSystem) -> dict[str, float]:
    """The five labeled quantities, in bits."""
    return {
        "I_XY": generalized_mutual_info(system),
        "H_X": forecasting_entropy(system),
        "H_X_given_Y": posterior_forecasting_entropy(system),
        "H_Y": generalized_entropy_Y(system),
        "H_Y_given_X": fuzzy_entropy(system),
    }
