"""Pattern label taxonomy: the closed set of NSW categories the system knows.

Each label owns a full-match surface format (used by the legality checks and
as the softmax mask) and exactly one reader function (registered in
:mod:`mtnorm.reader`). The shipped set covers the ten core patterns plus a
dollar-amount example of registry extension; the registry accepts up to
``MAX_LABELS`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_LABELS = 36

# Full-match patterns over NSW surface strings. Deliberately overlapping:
# a bare digit string is format-legal for several labels and only context
# can pick one, which is what the classifier is for.
_NUM = r"\d{1,12}"
_NUM_COMMA = r"\d{1,3}(?:,\d{3})+"
_DEC = r"\d{1,12}(?:\.\d{1,6})?"
_HAN = r"[一-鿿]"


@dataclass(frozen=True)
class PatternLabel:
    """One pattern group: dense id, unique name, surface format, blurb."""

    id: int
    name: str
    format_pattern: str
    description: str = ""


class LabelRegistry:
    """Dense, ordered registry of pattern labels (name and id unique)."""

    def __init__(self, labels: list[PatternLabel] | None = None):
        self._labels: list[PatternLabel] = []
        self._by_name: dict[str, PatternLabel] = {}
        for lab in labels or []:
            self.register(lab.name, lab.format_pattern, lab.description)

    def register(self, name: str, format_pattern: str, description: str = "") -> PatternLabel:
        if name in self._by_name:
            raise ValueError(f"duplicate label name: {name}")
        if len(self._labels) >= MAX_LABELS:
            raise ValueError(f"label registry is full ({MAX_LABELS} entries)")
        lab = PatternLabel(len(self._labels), name, format_pattern, description)
        self._labels.append(lab)
        self._by_name[name] = lab
        return lab

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self):
        return iter(self._labels)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def by_id(self, label_id: int) -> PatternLabel:
        if not 0 <= label_id < len(self._labels):
            raise KeyError(f"unknown label id: {label_id}")
        return self._labels[label_id]

    def by_name(self, name: str) -> PatternLabel:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown label name: {name}") from None

    def id_of(self, name: str) -> int:
        return self.by_name(name).id

    def names(self) -> list[str]:
        return [lab.name for lab in self._labels]


def default_registry() -> LabelRegistry:
    """Build the shipped taxonomy."""
    reg = LabelRegistry()
    reg.register(
        "A_Read_No_Zero",
        rf"(?:{_NUM_COMMA}|{_NUM})",
        "positional number reading, e.g. 200 people",
    )
    reg.register(
        "A_Spell_Keep_Zero",
        _NUM,
        "digit-by-digit spelling keeping zeros, e.g. the 2020 conference",
    )
    reg.register(
        "B_Percent",
        rf"{_DEC}%",
        "percentage, e.g. only 10% of students voted",
    )
    reg.register(
        "B_Range",
        rf"{_DEC}[-~—]{_DEC}",
        "numeric range, e.g. about 10-15 degrees",
    )
    reg.register(
        "B_Score_Ratio",
        r"\d{1,3}[-:]\d{1,3}",
        "game score or ratio, e.g. 30-10 leading",
    )
    reg.register(
        "B_Slash_Per",
        rf"{_DEC}{_HAN}{{0,3}}/{_HAN}{{1,3}}",
        "per-unit quantity, e.g. five people/group",
    )
    reg.register(
        "B_Time",
        r"(?:[01]?\d|2[0-3]):[0-5]\d",
        "clock time, e.g. it starts at 10:30",
    )
    reg.register(
        "B_Date_YMD",
        r"\d{4}-(?:0?[1-9]|1[0-2])-(?:0?[1-9]|[12]\d|3[01])",
        "dashed date, e.g. today is 2019-10-01",
    )
    reg.register(
        "A_Two_Liang",
        r"2",
        "standalone 2 read as liang, e.g. 2 people",
    )
    reg.register(
        "A_One_Yao_Spell",
        _NUM,
        "digit-by-digit with 1 read as yao, e.g. call 911",
    )
    # Registry extension example beyond the core ten.
    reg.register(
        "B_Dollar",
        rf"\${_DEC}",
        "dollar amount, e.g. $20",
    )
    return reg


DEFAULT_REGISTRY = default_registry()
