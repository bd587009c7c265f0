"""Character vocabulary for the pattern classifier.

Ids 0 and 1 are reserved; one of them is the padding code and the other
catches unknown characters, so the pad-with-0 ablation only swaps which
embedding row absorbs padding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..corpus import PAD_CHAR, ContextWindow, LabeledSentence


@dataclass(frozen=True)
class Vocabulary:
    char_to_id: dict[str, int]
    pad_id: int = 1
    unk_id: int = 0

    def __post_init__(self):
        if self.pad_id == self.unk_id:
            raise ValueError("pad_id and unk_id must differ")
        ids = sorted(self.char_to_id.values())
        if ids and (ids[0] < 2 or len(set(ids)) != len(ids) or ids[-1] != len(ids) + 1):
            raise ValueError("character ids must be dense in [2, V)")

    @property
    def size(self) -> int:
        return len(self.char_to_id) + 2

    def id_of(self, char: str) -> int:
        if char == PAD_CHAR:
            return self.pad_id
        return self.char_to_id.get(char, self.unk_id)

    def window_ids(self, window: ContextWindow) -> list[int]:
        return [self.id_of(ch) for ch in window.chars]


def build_vocab(corpus: Iterable[LabeledSentence], pad_id: int = 1) -> Vocabulary:
    """Dense vocabulary over every character seen in the corpus."""
    if pad_id not in (0, 1):
        raise ValueError("pad_id must be one of the reserved ids 0 or 1")
    chars = sorted({ch for sentence in corpus for ch in sentence.text})
    mapping = {ch: i + 2 for i, ch in enumerate(chars)}
    return Vocabulary(mapping, pad_id=pad_id, unk_id=1 - pad_id)
