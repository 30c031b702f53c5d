"""Detect, characterize and summarize first-hand violence reports in social media posts.

Records are plain dicts in the JSONL schema used by the command-line tool.
"""

import json

from . import _reptrack
from ._reptrack import (
    ConfigError,
    DataError,
    ModelFileError,
    avg_precision_at_k,
    clean,
    extract_tuples,
    passes_filter,
    precision_at_k,
    prepare,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "ModelFileError",
    "analyze",
    "avg_precision_at_k",
    "clean",
    "evaluate",
    "extract_tuples",
    "passes_filter",
    "precision_at_k",
    "prepare",
    "synth",
]


def _settings(seed=None, threads=None, **overrides):
    """Config keys use dots, which keyword arguments cannot; pass "linear__l2" for "linear.l2"."""
    out = {}
    for key, value in overrides.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        out[key.replace("__", ".")] = str(value)
    if seed is not None:
        out["seed"] = str(seed)
    out["threads"] = str(1 if threads is None else threads)
    return out


def _lines(records):
    return [json.dumps(r) for r in records]


def synth(n_docs=1000, seed=0, signal_strength=0.9, hashtag_rate=0.5, url_rate=0.2):
    """Synthetic annotated corpus as a list of record dicts."""
    return [json.loads(l) for l in _reptrack.synth(n_docs, seed, signal_strength, hashtag_rate, url_rate)]


def evaluate(records, folds=5, seed=0, threads=None, stratified=False, **config):
    """Cross-validation results as the JSON structure written by `reptrack evaluate --json`."""
    settings = _settings(seed, threads, folds=folds, stratified=stratified, **config)
    return json.loads(_reptrack.evaluate(_lines(records), settings))


def analyze(reports, victim="SLF", include_ungated=False):
    """Distribution tables over scored report dicts; victim=None keeps every victim class."""
    return json.loads(_reptrack.analyze(_lines(reports), victim, include_ungated))


class Model:
    """Trained cascade: detector, characterizers, gate and perpetrator tagger."""

    def __init__(self, native):
        self._native = native

    @classmethod
    def train(cls, records, seed=0, threads=None, **config):
        return cls(_reptrack.Model.train(_lines(records), _settings(seed, threads, **config)))

    @classmethod
    def load(cls, path):
        return cls(_reptrack.Model.load(str(path)))

    @classmethod
    def from_bytes(cls, data):
        return cls(_reptrack.Model.from_bytes(data))

    def save(self, path):
        self._native.save(str(path))

    def to_bytes(self):
        return self._native.to_bytes()

    @property
    def threshold(self):
        return self._native.threshold

    @threshold.setter
    def threshold(self, value):
        self._native.threshold = value

    @property
    def n_features(self):
        return self._native.n_features

    def score(self, docs, threads=1):
        """One report dict per input document dict ({"id", "text"} at minimum)."""
        return [json.loads(l) for l in self._native.score(_lines(docs), threads)]

    def tag(self, text):
        return self._native.tag(text)
