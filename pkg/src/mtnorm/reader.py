"""NSW-to-SFW readers, one per pattern label.

Numeral conventions pinned here (and frozen in the fixture table shipped
under ``data/fixtures.tsv``):

* positional reading groups by 万/亿, collapses interior zero runs to one
  零, keeps trailing zeros silent, and reduces a leading 一十 to 十;
* with ``use_liang`` a 2 reads 两 directly before 百/千, and a whole group
  of exactly 2 reads 两 before 万/亿 (二十二万 keeps 二);
* digit spelling reads 0 as 零 and, with ``use_yao``, 1 as 幺;
* hours of exactly 2 read 两点; minutes 00 are omitted, minutes 01-09 read
  零X分;
* per-unit quantities swap operands: 5人/组 reads 每组五人.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .labels import DEFAULT_REGISTRY, LabelRegistry
from . import legality

DIGIT_CHARS = "零一二三四五六七八九"
_GROUP_UNITS = ("", "十", "百", "千")

MAX_POSITIONAL = 10**12


def _read_group(value: int, use_liang: bool) -> str:
    """Read 1..9999 positionally with 千/百/十 units."""
    out = []
    pending_zero = False
    started = False
    for pos in (3, 2, 1, 0):
        d = (value // 10**pos) % 10
        if d == 0:
            pending_zero = started
            continue
        if pending_zero:
            out.append("零")
            pending_zero = False
        if d == 2 and use_liang and pos >= 2:
            out.append("两")
        else:
            out.append(DIGIT_CHARS[d])
        out.append(_GROUP_UNITS[pos])
        started = True
    return "".join(out)


def read_number_positional(digits: str, use_liang: bool = False) -> str:
    """Standard Mandarin positional reading of a digit string below 10^12."""
    if not digits or not digits.isdigit():
        raise ValueError(f"not a digit string: {digits!r}")
    n = int(digits)
    if n >= MAX_POSITIONAL:
        raise ValueError(f"magnitude out of range for positional reading: {digits}")
    if n == 0:
        return "零"
    groups = (n // 10**8, (n // 10**4) % 10**4, n % 10**4)
    out = ""
    for value, unit in zip(groups, ("亿", "万", "")):
        if value == 0:
            continue
        if out and value < 1000:
            out += "零"
        if value == 2 and use_liang and unit:
            out += "两" + unit
        else:
            out += _read_group(value, use_liang) + unit
    if out.startswith("一十"):
        out = out[1:]
    return out


def spell_digits(digits: str, use_yao: bool = False) -> str:
    """Digit-by-digit reading; zeros kept, 1 read 幺 when ``use_yao``."""
    if not digits or not digits.isdigit():
        raise ValueError(f"not a digit string: {digits!r}")
    table = "零幺二三四五六七八九" if use_yao else DIGIT_CHARS
    return "".join(table[int(d)] for d in digits)


def read_decimal(number: str, use_liang: bool = False) -> str:
    """Read ``123.45``-style strings: positional integer part, spelled fraction."""
    integer, dot, fraction = number.partition(".")
    out = read_number_positional(integer, use_liang)
    if dot:
        if not fraction:
            raise ValueError(f"dangling decimal point: {number!r}")
        out += "点" + spell_digits(fraction)
    return out


@dataclass(frozen=True)
class RenderedSFW:
    """A spoken-form rendering of one NSW surface."""

    text: str
    source: str
    label: int


_RANGE_SEP = re.compile(r"[-~—]")
_PER_LEFT = re.compile(r"(?P<num>\d+(?:\.\d+)?)(?P<unit>[一-鿿]*)")


def _read_quantity(num: str) -> str:
    # Counted quantities read a bare 2 as 两 (两人, not 二人).
    if num == "2":
        return "两"
    return read_decimal(num)


def _render_read(surface: str) -> str:
    return read_number_positional(surface.replace(",", ""))


def _render_spell(surface: str) -> str:
    return spell_digits(surface)


def _render_yao(surface: str) -> str:
    return spell_digits(surface, use_yao=True)


def _render_liang(surface: str) -> str:
    return "两"


def _render_percent(surface: str) -> str:
    return "百分之" + read_decimal(surface[:-1])


def _render_range(surface: str) -> str:
    lo, hi = _RANGE_SEP.split(surface, maxsplit=1)
    return read_decimal(lo) + "到" + read_decimal(hi)


def _render_score(surface: str) -> str:
    a, b = re.split(r"[-:]", surface, maxsplit=1)
    return read_number_positional(a) + "比" + read_number_positional(b)


def _render_time(surface: str) -> str:
    hour, minute = surface.split(":")
    h = int(hour)
    out = ("两" if h == 2 else read_number_positional(str(h))) + "点"
    if minute == "00":
        return out
    if minute[0] == "0":
        return out + "零" + DIGIT_CHARS[int(minute[1])] + "分"
    return out + read_number_positional(minute) + "分"


def _render_date(surface: str) -> str:
    year, month, day = surface.split("-")
    return (
        spell_digits(year)
        + "年"
        + read_number_positional(str(int(month)))
        + "月"
        + read_number_positional(str(int(day)))
        + "日"
    )


def _render_per(surface: str) -> str:
    left, right = surface.split("/", 1)
    m = _PER_LEFT.fullmatch(left)
    if m is None:
        raise ValueError(f"unreadable per-unit quantity: {surface!r}")
    return "每" + right + _read_quantity(m.group("num")) + m.group("unit")


def _render_dollar(surface: str) -> str:
    return read_decimal(surface[1:]) + "美元"


RENDERERS: dict[str, Callable[[str], str]] = {
    "A_Read_No_Zero": _render_read,
    "A_Spell_Keep_Zero": _render_spell,
    "A_One_Yao_Spell": _render_yao,
    "A_Two_Liang": _render_liang,
    "B_Percent": _render_percent,
    "B_Range": _render_range,
    "B_Score_Ratio": _render_score,
    "B_Time": _render_time,
    "B_Date_YMD": _render_date,
    "B_Slash_Per": _render_per,
    "B_Dollar": _render_dollar,
}


def render(surface: str, label: int | str, registry: LabelRegistry = DEFAULT_REGISTRY) -> RenderedSFW:
    """Render an NSW surface via the label's reader.

    The surface must pass the label's format check; an illegal pairing is a
    caller error (the pipeline verifies before rendering).
    """
    lab = registry.by_name(label) if isinstance(label, str) else registry.by_id(label)
    formats = None if registry is DEFAULT_REGISTRY else legality.FormatRegistry(registry)
    if not legality.verify(surface, lab.id, formats):
        raise ValueError(f"surface {surface!r} is not legal for label {lab.name}")
    try:
        renderer = RENDERERS[lab.name]
    except KeyError:
        raise ValueError(f"no reader registered for label {lab.name}") from None
    return RenderedSFW(text=renderer(surface), source=surface, label=lab.id)
