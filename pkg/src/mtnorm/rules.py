"""Prioritized context-pattern rules: the baseline normalizer and fallback.

Matching walks rules by declared context length, longest first, so more
specific context always beats higher priority at a shorter length;
priority breaks ties within a length, rule name breaks exact ties. The
order is derived from the rule fields, never from file position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import LabeledSentence, NSWSpan
from .extractor import extract_nsw
from .labels import DEFAULT_REGISTRY, LabelRegistry
from . import legality, reader


class RuleError(ValueError):
    """Bad rule file or unresolvable rule configuration."""


@dataclass(frozen=True)
class Rule:
    name: str
    group: str
    priority: int
    pre_pattern: re.Pattern
    nsw_pattern: re.Pattern
    post_pattern: re.Pattern
    context_len: int
    label: int

    def sort_key(self):
        # Descending specificity, descending priority, stable by name.
        return (-self.context_len, -self.priority, self.name)


@dataclass(frozen=True)
class RuleMatch:
    rule: Rule
    span: NSWSpan
    label: int


class RuleSet:
    """Rules indexed in match order; immutable after construction."""

    def __init__(self, rules: list[Rule]):
        names = [r.name for r in rules]
        if len(set(names)) != len(names):
            dupe = next(n for n in names if names.count(n) > 1)
            raise RuleError(f"duplicate rule name: {dupe}")
        self.rules: tuple[Rule, ...] = tuple(sorted(rules, key=Rule.sort_key))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


_RULE_FIELDS = {"group", "priority", "context_len", "pre", "nsw", "post", "label"}


def parse_rules(text: str, labels: LabelRegistry = DEFAULT_REGISTRY, source: str = "<rules>") -> RuleSet:
    records: list[tuple[int, str, dict[str, str]]] = []
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if not sep:
            raise RuleError(f"{source}:{lineno}: expected 'field: value', got {raw!r}")
        if key == "rule":
            if not value:
                raise RuleError(f"{source}:{lineno}: rule needs a name")
            current = {}
            records.append((lineno, value, current))
        elif current is None:
            raise RuleError(f"{source}:{lineno}: field outside a rule record")
        elif key in _RULE_FIELDS:
            current[key] = value
        else:
            raise RuleError(f"{source}:{lineno}: unknown field {key!r}")

    rules = []
    for lineno, name, fields in records:
        label_name = fields.get("label", "")
        if label_name not in labels:
            raise RuleError(f"{source}:{lineno}: rule {name}: unknown label {label_name!r}")
        nsw = fields.get("nsw", "")
        if not nsw:
            raise RuleError(f"{source}:{lineno}: rule {name}: nsw pattern is required")
        try:
            rules.append(
                Rule(
                    name=name,
                    group=fields.get("group", ""),
                    priority=int(fields.get("priority", "0")),
                    pre_pattern=re.compile(fields.get("pre", "")),
                    nsw_pattern=re.compile(nsw),
                    post_pattern=re.compile(fields.get("post", "")),
                    context_len=int(fields.get("context_len", "0")),
                    label=labels.id_of(label_name),
                )
            )
        except re.error as exc:
            raise RuleError(f"{source}:{lineno}: rule {name}: bad pattern: {exc}") from exc
        except ValueError as exc:
            raise RuleError(f"{source}:{lineno}: rule {name}: {exc}") from exc
        if rules[-1].context_len < 0:
            raise RuleError(f"{source}:{lineno}: rule {name}: context_len must be >= 0")
    return RuleSet(rules)


def compile_rules(path: str, labels: LabelRegistry = DEFAULT_REGISTRY) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), labels, source=path)


def _rule_matches(rule: Rule, text: str, span: NSWSpan) -> bool:
    surface = text[span.start : span.end]
    if rule.nsw_pattern.fullmatch(surface) is None:
        return False
    pre = text[max(0, span.start - rule.context_len) : span.start]
    post = text[span.end : span.end + rule.context_len]
    return bool(rule.pre_pattern.search(pre)) and bool(rule.post_pattern.search(post))


def match_nsw(rs: RuleSet, sentence: LabeledSentence | str, span: NSWSpan) -> RuleMatch | None:
    """First rule in specificity order whose patterns all match at the span."""
    text = sentence if isinstance(sentence, str) else sentence.text
    for rule in rs.rules:
        if _rule_matches(rule, text, span):
            return RuleMatch(rule, span, rule.label)
    return None


def normalize_rule_based(
    rs: RuleSet,
    text: str,
    labels: LabelRegistry = DEFAULT_REGISTRY,
) -> tuple[str, list["pipeline.NormalizationTrace"]]:
    """Rule-only normalization of a sentence, NSW left verbatim on no-match."""
    from . import pipeline  # trace type lives with the orchestrator

    formats = (
        legality.default_formats()
        if labels is DEFAULT_REGISTRY
        else legality.FormatRegistry(labels)
    )
    spans = extract_nsw(text)
    traces = []
    for span in spans:
        surface = text[span.start : span.end]
        match = match_nsw(rs, text, span)
        sfw = None
        label = None
        route = pipeline.ROUTE_UNMATCHED
        if match is not None and formats.verify(surface, match.label):
            sfw = reader.render(surface, match.label, labels).text
            label = match.label
            route = pipeline.ROUTE_PRIORITY
        traces.append(pipeline.NormalizationTrace(span=span, route=route, label=label, sfw=sfw))
    out = text
    for trace in reversed(traces):
        if trace.sfw is not None:
            out = out[: trace.span.start] + trace.sfw + out[trace.span.end :]
    return out, traces
