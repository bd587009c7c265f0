"""End-to-end hybrid normalization.

Per sentence: extract NSW spans, classify every span against the original
text first (replacements would shift the context other spans depend on),
then splice the spoken forms right-to-left so earlier indices stay valid.
Routing per span: priority surfaces go straight to the rules; everything
else is classified under the legality mask and verified, with rule
fallback on any failure; a span nothing can handle stays verbatim.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from . import legality, reader
from .corpus import LabeledSentence, NSWSpan, extract_window
from .extractor import PriorityList, extract_nsw, priority_check
from .labels import DEFAULT_REGISTRY, LabelRegistry
from .neural import ClassifierConfig, EncoderParams, Vocabulary, classify
from .rules import RuleSet, match_nsw

ROUTE_PRIORITY = "priority_rule"
ROUTE_NEURAL = "neural"
ROUTE_FALLBACK = "fallback_rule"
ROUTE_UNMATCHED = "unmatched"

_SENTENCE_SPLIT = re.compile(r"[^。！？!?；;\n]*[。！？!?；;\n]?")


def split_sentences(text: str) -> list[str]:
    """Thin pre-step for raw documents: split after sentence-final punctuation."""
    return [m.group() for m in _SENTENCE_SPLIT.finditer(text) if m.group()]


@dataclass
class NormalizationTrace:
    """Audit record for one NSW: route taken, label chosen, rendering."""

    span: NSWSpan
    route: str
    label: int | None = None
    sfw: str | None = None
    probabilities: np.ndarray | None = None

    def to_record(self, labels: LabelRegistry = DEFAULT_REGISTRY) -> dict:
        return {
            "start": self.span.start,
            "end": self.span.end,
            "route": self.route,
            "label": None if self.label is None else labels.by_id(self.label).name,
            "sfw": self.sfw,
            "probabilities": None
            if self.probabilities is None
            else [round(float(p), 6) for p in self.probabilities],
        }


@dataclass
class HybridSystem:
    """Everything inference needs, sharing one label universe."""

    rules: RuleSet
    priority: PriorityList
    params: EncoderParams
    config: ClassifierConfig
    vocab: Vocabulary
    formats: legality.FormatRegistry
    labels: LabelRegistry = DEFAULT_REGISTRY

    def __post_init__(self):
        if len(self.formats) != len(self.labels):
            raise ValueError("format registry and label registry disagree")
        if self.config.label_count != len(self.labels):
            raise ValueError("classifier label count and label registry disagree")


def _rule_route(sys: HybridSystem, text: str, span: NSWSpan, surface: str, route: str, probs=None):
    match = match_nsw(sys.rules, text, span)
    if match is not None and sys.formats.verify(surface, match.label):
        sfw = reader.render(surface, match.label, sys.labels).text
        return NormalizationTrace(span, route, match.label, sfw, probs)
    return NormalizationTrace(span, ROUTE_UNMATCHED, None, None, probs)


def _normalize_span(sys: HybridSystem, text: str, sentence: LabeledSentence, span: NSWSpan):
    surface = text[span.start : span.end]
    if priority_check(surface, sys.priority):
        return _rule_route(sys, text, span, surface, ROUTE_PRIORITY)

    legal = sys.formats.legal_labels(surface)
    if not sys.config.use_mask:
        legal = [True] * len(sys.labels)
    probs = None
    try:
        window = extract_window(sentence, span, sys.config.window)
        probs, label = classify(window, sys.vocab, sys.params, sys.config, legal)
    except ValueError:
        return _rule_route(sys, text, span, surface, ROUTE_FALLBACK)
    if not sys.formats.verify(surface, label):
        return _rule_route(sys, text, span, surface, ROUTE_FALLBACK, probs)
    try:
        sfw = reader.render(surface, label, sys.labels).text
    except ValueError:
        return _rule_route(sys, text, span, surface, ROUTE_FALLBACK, probs)
    return NormalizationTrace(span, ROUTE_NEURAL, label, sfw, probs)


def normalize(text: str, sys: HybridSystem) -> tuple[str, list[NormalizationTrace]]:
    """Normalize one sentence; returns the output text and per-NSW traces."""
    spans = extract_nsw(text)
    sentence = LabeledSentence(text, ())
    traces = [_normalize_span(sys, text, sentence, span) for span in spans]
    out = text
    for trace in reversed(traces):
        if trace.sfw is not None:
            out = out[: trace.span.start] + trace.sfw + out[trace.span.end :]
    return out, traces


def routing_stats(corpus, sys: HybridSystem) -> tuple[float, float, float]:
    """(priority, neural, fallback) fractions over all extracted spans.

    ``corpus`` is a list of sentences (labeled or raw strings). Priority
    and neural partition the spans; fallback is the sub-fraction of
    neural-routed spans that failed verification and flowed back.
    """
    priority = neural = fallback = 0
    for item in corpus:
        text = item if isinstance(item, str) else item.text
        for trace in normalize(text, sys)[1]:
            if priority_check(text[trace.span.start : trace.span.end], sys.priority):
                priority += 1
            else:
                neural += 1
                if trace.route != ROUTE_NEURAL:
                    fallback += 1
    total = priority + neural
    if total == 0:
        return 0.0, 0.0, 0.0
    return priority / total, neural / total, fallback / neural if neural else 0.0


def write_traces(path: str, traced: list[tuple[str, list[NormalizationTrace]]],
                 labels: LabelRegistry = DEFAULT_REGISTRY) -> None:
    """Line-delimited audit records, one JSON object per NSW."""
    with open(path, "w", encoding="utf-8") as fh:
        for text, traces in traced:
            for trace in traces:
                record = {"text": text, **trace.to_record(labels)}
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
