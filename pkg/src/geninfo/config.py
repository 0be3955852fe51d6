"""YAML config documents -> validated domain objects.

Structural problems (bad YAML, missing keys, wrong types) are *parse*
errors; well-formed values that break a domain invariant (a distribution
summing to 0.9, a negative width) are *validation* errors. Both are
collected with the path of the offending field. See docs/config_schema.md.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .core_prob import Alphabet, Channel, Distribution
from .errors import GeninfoError
from .experiments import GrayLevelConfig, Prediction, StockConfig, default_s_grid
from .rate_fidelity import DEFAULT_MAX_ITER, DistortionMatrix
from .semantic import DEFAULT_EPSILON, SemanticChannel, TruthFunction, gaussian_truth

PARSE, INVALID = "parse", "invalid"


@dataclass
class Violation:
    path: str
    message: str
    kind: str = PARSE

    def __str__(self):
        return f"{self.path}: {self.message}"


class ConfigError(Exception):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))

    @property
    def exit_code(self) -> int:
        return 2 if any(v.kind == PARSE for v in self.violations) else 3


@dataclass
class Problem:
    """Everything a subcommand may need; absent sections stay None."""

    alphabet: Alphabet | None = None
    prior: Distribution | None = None
    forecast: Distribution | None = None
    evidence: Distribution | None = None
    truth: TruthFunction | None = None
    source_truth: TruthFunction | None = None
    messages: SemanticChannel | None = None
    channel: Channel | None = None
    distortion: DistortionMatrix | None = None
    graylevel: GrayLevelConfig | None = None
    stock: StockConfig | None = None
    s_grid: np.ndarray | None = None
    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITER
    event: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)


def parse_s_grid(spec) -> np.ndarray:
    """Accept "start:stop:count", {start, stop, count} or an explicit list."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError('expected "start:stop:count"')
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(start, stop, count)
    if isinstance(spec, dict):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["count"]))
    if isinstance(spec, list):
        return np.array([float(v) for v in spec])
    raise ValueError("s_grid must be a list, a mapping or a start:stop:count string")


def load_document(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "document"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([Violation(where, f"malformed YAML: {problem}")]) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError([Violation("<root>", "document must be a mapping")])
    return doc


class _Parser:
    def __init__(self, doc: dict):
        self.doc = doc
        self.errors: list[Violation] = []

    def fail(self, path, msg, kind=PARSE):
        self.errors.append(Violation(path, msg, kind))

    def vector(self, node, path):
        if not isinstance(node, list) or not node:
            self.fail(path, "expected a non-empty list of numbers")
            return None
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in node):
            self.fail(path, "expected a list of numbers")
            return None
        return np.array(node, dtype=float)

    def matrix(self, node, path):
        if not isinstance(node, list) or not node or not all(isinstance(r, list) for r in node):
            self.fail(path, "expected a row-major list of lists")
            return None
        rows = [self.vector(r, f"{path}[{i}]") for i, r in enumerate(node)]
        if any(r is None for r in rows):
            return None
        if len({r.size for r in rows}) != 1:
            self.fail(path, "rows have different lengths")
            return None
        return np.vstack(rows)

    def build(self, path, fn, *args):
        try:
            return fn(*args)
        except (GeninfoError, ValueError) as exc:
            self.fail(path, str(exc), INVALID)
            return None

    def alphabet(self):
        node = self.doc.get("alphabet")
        if node is None:
            return None
        if isinstance(node, list):
            node = {"labels": node}
        if not isinstance(node, dict):
            self.fail("alphabet", "expected a mapping with labels and/or values")
            return None
        labels, values = node.get("labels"), node.get("values")
        if "size" in node:
            if not isinstance(node["size"], int) or node["size"] < 1:
                self.fail("alphabet.size", "expected a positive integer")
                return None
            return Alphabet.of_size(node["size"])
        if values is not None:
            values = self.vector(values, "alphabet.values")
            if values is None:
                return None
        if labels is not None and not isinstance(labels, list):
            self.fail("alphabet.labels", "expected a list")
            return None
        if labels is None and values is None:
            self.fail("alphabet", "needs labels, values or size")
            return None
        if labels is None:
            return self.build("alphabet", Alphabet.from_values, values)
        return self.build("alphabet", Alphabet, tuple(labels), values)

    def distribution(self, key, alphabet):
        node = self.doc.get(key)
        if node is None:
            return None
        vec = self.vector(node, key)
        if vec is None:
            return None
        if alphabet is not None and vec.size != len(alphabet):
            self.fail(key, f"has {vec.size} entries but the alphabet has {len(alphabet)}", INVALID)
            return None
        return self.build(key, Distribution, vec, alphabet)

    def truth(self, node, path, alphabet):
        name = None
        if isinstance(node, dict):
            name = node.get("name")
            if "degrees" in node:
                node = node["degrees"]
            elif "center" in node or "width" in node:
                if alphabet is None or alphabet.values is None:
                    self.fail(path, "a {center, width} truth function needs alphabet.values")
                    return None
                c, w = node.get("center"), node.get("width")
                if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (c, w)):
                    self.fail(path, "center and width must both be numbers")
                    return None
                tf = self.build(path, gaussian_truth, alphabet, c, w)
                if tf is not None and name is not None:
                    tf = TruthFunction(tf.degrees, tf.alphabet, tf.center, tf.width, str(name))
                return tf
            elif "constant" in node:
                if alphabet is None:
                    self.fail(path, "a constant truth function needs an alphabet")
                    return None
                node = [node["constant"]] * len(alphabet)
            else:
                self.fail(path, "expected degrees, {center, width} or constant")
                return None
        vec = self.vector(node, path)
        if vec is None:
            return None
        if alphabet is not None and vec.size != len(alphabet):
            self.fail(path, f"has {vec.size} degrees but the alphabet has {len(alphabet)}", INVALID)
            return None
        return self.build(path, TruthFunction, vec, alphabet, None, None,
                          None if name is None else str(name))


def parse_config(doc: dict | str, required: tuple[str, ...] = ()) -> Problem:
    """Validate a config document; raises ConfigError listing every violation."""
    if isinstance(doc, str):
        doc = load_document(doc)
    p = _Parser(doc)
    prob = Problem()

    prob.alphabet = p.alphabet()
    alphabet = prob.alphabet
    if alphabet is None and isinstance(doc.get("prior"), list):
        alphabet = Alphabet.of_size(len(doc["prior"]))
        prob.alphabet = alphabet
    prob.prior = p.distribution("prior", alphabet)
    prob.forecast = p.distribution("forecast", alphabet)
    prob.evidence = p.distribution("evidence", alphabet)
    if "truth" in doc:
        prob.truth = p.truth(doc["truth"], "truth", alphabet)
    if "source_truth" in doc:
        prob.source_truth = p.truth(doc["source_truth"], "source_truth", alphabet)
    if "messages" in doc:
        node = doc["messages"]
        if not isinstance(node, list) or not node:
            p.fail("messages", "expected a non-empty list of truth functions")
        else:
            tfs = [p.truth(t, f"messages[{j}]", alphabet) for j, t in enumerate(node)]
            if all(t is not None for t in tfs):
                prob.messages = p.build("messages", SemanticChannel, tfs)
    if "channel" in doc:
        mat = p.matrix(doc["channel"], "channel")
        if mat is not None:
            prob.channel = p.build("channel", Channel, mat)
    if "distortion" in doc:
        node = doc["distortion"]
        if isinstance(node, dict) and "kind" in node:
            kind = node["kind"]
            if kind == "hamming":
                n = len(alphabet) if alphabet is not None else node.get("size")
                prob.distortion = p.build("distortion", DistortionMatrix.hamming, n)
            elif kind == "squared":
                if alphabet is None or alphabet.values is None:
                    p.fail("distortion", "squared error needs alphabet.values")
                else:
                    prob.distortion = DistortionMatrix.squared_error(alphabet.values)
            else:
                p.fail("distortion.kind", f"unknown kind {kind!r} (hamming or squared)")
        else:
            mat = p.matrix(node, "distortion")
            if mat is not None:
                prob.distortion = p.build("distortion", DistortionMatrix, mat)
    if "graylevel" in doc:
        node = doc["graylevel"]
        if not isinstance(node, dict) or "k" not in node or "d" not in node:
            p.fail("graylevel", "expected a mapping with k and d")
        else:
            prob.graylevel = p.build(
                "graylevel", GrayLevelConfig, int(node["k"]), float(node["d"]),
                tuple(default_s_grid()), node.get("reference_bits", 6),
            )
    if "stock" in doc:
        prob.stock = _stock(p, doc["stock"])
    if "s_grid" in doc:
        prob.s_grid = p.build("s_grid", parse_s_grid, doc["s_grid"])
    if "epsilon" in doc:
        eps = doc["epsilon"]
        if not isinstance(eps, (int, float)) or not 0 < eps < 1:
            p.fail("epsilon", "expected a number in (0, 1)", INVALID)
        else:
            prob.epsilon = float(eps)
    if "max_iterations" in doc:
        mi = doc["max_iterations"]
        if not isinstance(mi, int) or mi < 1:
            p.fail("max_iterations", "expected a positive integer", INVALID)
        else:
            prob.max_iterations = mi
    if "event" in doc:
        ev = doc["event"]
        if alphabet is not None and isinstance(ev, str) and ev in alphabet.labels:
            prob.event = alphabet.labels.index(ev)
        elif isinstance(ev, int) and alphabet is not None and 0 <= ev < len(alphabet):
            prob.event = ev
        else:
            p.fail("event", "expected an alphabet label or a valid index")

    _cross_checks(p, prob)
    for key in required:
        if getattr(prob, key) is None and not any(v.path.split("[")[0].split(".")[0] == key for v in p.errors):
            p.fail(key, "required for this subcommand")
    known = set(Problem.__dataclass_fields__) | {"experiment"}
    prob.extra = {k: v for k, v in doc.items() if k not in known}
    if p.errors:
        raise ConfigError(p.errors)
    return prob


def _stock(p: _Parser, node) -> StockConfig | None:
    if not isinstance(node, dict):
        p.fail("stock", "expected a mapping")
        return None
    for key in ("x0", "d0", "predictions", "value_grid"):
        if key not in node:
            p.fail(f"stock.{key}", "missing")
    if any(v.path.startswith("stock") for v in p.errors):
        return None
    grid = node["value_grid"]
    if isinstance(grid, dict):
        try:
            grid = np.arange(float(grid["start"]), float(grid["stop"]) + 0.5 * float(grid["step"]),
                             float(grid["step"]))
        except (KeyError, TypeError, ValueError):
            p.fail("stock.value_grid", "expected {start, stop, step} or a list")
            return None
    else:
        grid = p.vector(grid, "stock.value_grid")
        if grid is None:
            return None
    preds = []
    for j, pr in enumerate(node["predictions"] or []):
        if not isinstance(pr, dict):
            p.fail(f"stock.predictions[{j}]", "expected {center, width} or {constant}")
            return None
        preds.append(Prediction(pr.get("center"), pr.get("width"), pr.get("constant")))
    return p.build("stock", StockConfig, float(node["x0"]), float(node["d0"]), tuple(preds), tuple(grid))


def _cross_checks(p: _Parser, prob: Problem):
    if prob.channel is not None and prob.prior is not None and prob.channel.shape[0] != len(prob.prior):
        p.fail("channel", "row count does not match the prior", INVALID)
    if prob.channel is not None and prob.messages is not None and prob.channel.shape[1] != len(prob.messages):
        p.fail("channel", "column count does not match the number of messages", INVALID)
