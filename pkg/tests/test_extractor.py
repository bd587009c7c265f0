import random
import re

import pytest

from oracles import brute_force_extract

from mtnorm.extractor import (
    NSW_SCAN,
    PriorityList,
    extract_nsw,
    load_priority_list,
    priority_check,
)


def surfaces(text):
    return [text[s.start:s.end] for s in extract_nsw(text)]


class TestExtraction:
    def test_date_and_range(self):
        assert surfaces("今天是2019-10-01，气温10-15度") == ["2019-10-01", "10-15"]

    def test_no_digits_no_spans(self):
        assert extract_nsw("你好世界") == []
        assert extract_nsw("百分之十～另加——") == []

    def test_percent_included(self):
        assert surfaces("只有10%的学生投了票") == ["10%"]

    def test_dollar_prefix_in_span(self):
        assert surfaces("这支笔卖$20左右") == ["$20"]

    def test_trailing_symbols_excluded(self):
        assert surfaces("大约100,人到场") == ["100"]
        assert surfaces("时间是10:30。") == ["10:30"]

    def test_comma_grouped_number(self):
        assert surfaces("共1,000人参加") == ["1,000"]

    def test_adjacent_runs_leftmost_longest(self):
        assert surfaces("比分2019-10-01") == ["2019-10-01"]

    def test_reconstruction_property(self):
        rng = random.Random(7)
        pool = ["10:30", "2019-10-01", "50%", "8", "911", "1-3", "$20", "1,000"]
        for _ in range(300):
            parts = []
            for _ in range(rng.randint(0, 4)):
                parts.append("".join(rng.choice("今天比分气温汉字测试") for _ in range(rng.randint(1, 5))))
                parts.append(rng.choice(pool))
            parts.append("尾")
            text = "".join(parts)
            spans = extract_nsw(text)
            # non-overlapping, in order, and gaps + spans rebuild the input
            rebuilt = []
            cursor = 0
            for span in spans:
                assert span.start >= cursor
                rebuilt.append(text[cursor:span.start])
                rebuilt.append(text[span.start:span.end])
                cursor = span.end
            rebuilt.append(text[cursor:])
            assert "".join(rebuilt) == text

    def test_every_span_contains_a_digit(self):
        rng = random.Random(8)
        for _ in range(300):
            text = "".join(
                rng.choice("01239汉字.:-~—/%,$ ") for _ in range(rng.randint(0, 30))
            )
            for span in extract_nsw(text):
                assert any(ch.isdigit() for ch in text[span.start:span.end])

    def test_han_context_insensitive(self):
        rng = random.Random(9)
        for _ in range(200):
            left = "".join(rng.choice("据报道称昨天上午") for _ in range(rng.randint(0, 6)))
            right = "".join(rng.choice("左右开始结束等") for _ in range(rng.randint(0, 6)))
            assert surfaces(left + "10:30" + right) == ["10:30"]

    def test_scan_pattern_is_anchorless(self):
        assert NSW_SCAN.fullmatch("10:30")

    def test_matches_character_wise_scanner_oracle(self):
        rng = random.Random(11)
        alphabet = "0123456789.:-~—/%,$汉字测试 az"
        for _ in range(500):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
            got = [(s.start, s.end) for s in extract_nsw(text)]
            assert got == brute_force_extract(text), text


class TestPriorityCheck:
    def default_list(self):
        return PriorityList(frozenset({"911", "110"}), [re.compile(r"1[3-9]\d{9}")])

    def test_exact_match(self):
        assert priority_check("911", self.default_list()) is True

    def test_near_miss(self):
        assert priority_check("912", self.default_list()) is False

    def test_user_pattern_full_match(self):
        pl = self.default_list()
        assert priority_check("13912345678", pl) is True
        assert priority_check("139123456789", pl) is False  # 12 digits: not a full match

    def test_load_priority_file(self, tmp_path):
        path = tmp_path / "priority.txt"
        path.write_text("# comment\n911\nre: \\d{4}\n", encoding="utf-8")
        pl = load_priority_list(str(path))
        assert priority_check("911", pl)
        assert priority_check("1234", pl)
        assert not priority_check("12345", pl)

    def test_bad_pattern_rejected(self, tmp_path):
        path = tmp_path / "priority.txt"
        path.write_text("re: [unclosed\n", encoding="utf-8")
        with pytest.raises(ValueError, match="bad pattern"):
            load_priority_list(str(path))

    def test_shipped_list_covers_emergency_and_phones(self, priority_list):
        assert priority_check("911", priority_list)
        assert priority_check("13912345678", priority_list)
        assert not priority_check("912", priority_list)
