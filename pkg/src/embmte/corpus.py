"""DA-scored segment corpora: parsing, validation, and train/test splitting.

A corpus is an ordered collection of (hypothesis, reference, DA score)
segments tagged with a language pair, a dataset name, and an MT system name.
The file format is a strict seven-column TSV; text fields may not contain
tabs or newlines, so the format is bijective and diffable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import CorpusParseError, ValidationError

CORPUS_COLUMNS = ("pair", "dataset", "system", "seg_id", "hypothesis", "reference", "da_score")
CORPUS_HEADER = "\t".join(CORPUS_COLUMNS)

_LANG_CODE = re.compile(r"^[a-z]{2,3}$")
_BAD_TEXT_CHARS = ("\t", "\n", "\r")


@dataclass(frozen=True, order=True)
class LanguagePair:
    """A source/target language pair such as cs-en."""

    source: str
    target: str

    def __post_init__(self):
        for code in (self.source, self.target):
            if not _LANG_CODE.match(code):
                raise ValidationError(
                    f"language code must be 2-3 lowercase ASCII letters, got {code!r}"
                )
        if self.source == self.target:
            raise ValidationError(f"source and target must differ, got {self.source!r} twice")

    @classmethod
    def parse(cls, text: str) -> "LanguagePair":
        src, sep, tgt = text.partition("-")
        if not sep:
            raise ValidationError(f"language pair must look like 'cs-en', got {text!r}")
        return cls(src, tgt)

    def __str__(self) -> str:
        return f"{self.source}-{self.target}"


def _check_text_field(name: str, value: str) -> None:
    for ch in _BAD_TEXT_CHARS:
        if ch in value:
            raise ValidationError(f"{name} may not contain tab, CR, or newline characters")


@dataclass(frozen=True)
class Segment:
    """One scored hypothesis/reference pair."""

    id: str
    pair: LanguagePair
    dataset: str
    system: str
    hypothesis: str
    reference: str
    da_score: float

    def __post_init__(self):
        if not self.id:
            raise ValidationError("segment id must be non-empty")
        for name in ("id", "dataset", "system", "hypothesis", "reference"):
            _check_text_field(name, getattr(self, name))
        if not self.hypothesis.strip():
            raise ValidationError(f"segment {self.id}: hypothesis is empty")
        if not self.reference.strip():
            raise ValidationError(f"segment {self.id}: reference is empty")
        if not math.isfinite(self.da_score):
            raise ValidationError(f"segment {self.id}: da_score must be finite")


class DACorpus:
    """An ordered, id-unique collection of segments.

    Iteration order always equals construction (file) order; that order is
    the determinism anchor for every downstream split and report.
    """

    def __init__(self, segments: Iterable[Segment]):
        self.segments: tuple[Segment, ...] = tuple(segments)
        by_id: dict[str, Segment] = {}
        for seg in self.segments:
            if seg.id in by_id:
                raise ValidationError(f"duplicate segment id {seg.id!r}")
            by_id[seg.id] = seg
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __eq__(self, other) -> bool:
        return isinstance(other, DACorpus) and self.segments == other.segments

    def __contains__(self, seg_id: str) -> bool:
        return seg_id in self._by_id

    def by_id(self, seg_id: str) -> Segment:
        return self._by_id[seg_id]

    def ids(self) -> tuple[str, ...]:
        return tuple(seg.id for seg in self.segments)

    def pairs(self) -> tuple[LanguagePair, ...]:
        """Distinct language pairs in first-appearance order."""
        seen: dict[LanguagePair, None] = {}
        for seg in self.segments:
            seen.setdefault(seg.pair, None)
        return tuple(seen)


@dataclass(frozen=True)
class SplitSpec:
    """A train/test partition targeting one language pair."""

    target_pair: LanguagePair
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise ValidationError(f"train/test overlap on {len(overlap)} id(s)")


def parse_corpus(path) -> DACorpus:
    """Read a corpus TSV file, validating every row.

    Raises CorpusParseError (with line number) on malformed rows and
    ValidationError on duplicate ids.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusParseError(1, "empty file, expected header line")
    if lines[0] != CORPUS_HEADER:
        raise CorpusParseError(1, f"bad header, expected {CORPUS_HEADER!r}")

    segments = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(CORPUS_COLUMNS):
            raise CorpusParseError(
                line_no, f"expected {len(CORPUS_COLUMNS)} columns, got {len(fields)}"
            )
        pair_s, dataset, system, seg_id, hyp, ref, da_s = fields
        try:
            da_score = float(da_s)
        except ValueError:
            raise CorpusParseError(line_no, f"da_score is not a number: {da_s!r}") from None
        if not seg_id:
            seg_id = f"{dataset}/{pair_s}/{system}/{line_no}"
        try:
            segments.append(
                Segment(
                    id=seg_id,
                    pair=LanguagePair.parse(pair_s),
                    dataset=dataset,
                    system=system,
                    hypothesis=hyp,
                    reference=ref,
                    da_score=da_score,
                )
            )
        except ValidationError as exc:
            raise CorpusParseError(line_no, str(exc)) from None
    return DACorpus(segments)


def write_corpus(corpus: DACorpus, path) -> None:
    """Write a corpus as TSV; the exact inverse of parse_corpus."""
    rows = [CORPUS_HEADER]
    for seg in corpus:
        rows.append(
            "\t".join(
                (
                    str(seg.pair),
                    seg.dataset,
                    seg.system,
                    seg.id,
                    seg.hypothesis,
                    seg.reference,
                    repr(seg.da_score),
                )
            )
        )
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def leave_one_pair_out_split(
    corpus: DACorpus, target_pair: LanguagePair, test_dataset: str
) -> SplitSpec:
    """Hold out one (pair, dataset) slice for testing, train on everything else.

    The training side keeps the target pair's rows from *other* datasets,
    which is what makes a 2,000 + 2,800 segment training pool out of two
    WMT-style collections.
    """
    test_ids = []
    train_ids = []
    for seg in corpus:
        if seg.pair == target_pair and seg.dataset == test_dataset:
            test_ids.append(seg.id)
        else:
            train_ids.append(seg.id)
    if not test_ids:
        raise ValidationError(
            f"no segments with pair {target_pair} and dataset {test_dataset!r}"
        )
    return SplitSpec(target_pair=target_pair, train_ids=tuple(train_ids), test_ids=tuple(test_ids))


def kfold_assign(n: int, k: int, seed: int) -> np.ndarray:
    """Assign n items to k folds, deterministically for a given seed.

    Indices 0..n-1 are shuffled with PCG64 (a named, seedable,
    platform-independent generator) and dealt round-robin, so fold sizes
    differ by at most one and the assignment is reproducible everywhere.
    """
    if k < 2:
        raise ValidationError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValidationError(f"cannot split {n} items into {k} folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    folds = np.empty(n, dtype=np.int64)
    folds[perm] = np.arange(n, dtype=np.int64) % k
    return folds
