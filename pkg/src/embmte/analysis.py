"""Error analysis: where do two metrics disagree on the best translations?

Restricted to the top slice of segments by DA score (per language pair), each
metric rates a segment "high" when its score sits in that metric's own top
quantile for the pair. Disagreements are then broken down by word-surface
overlap, unknown-word content, and hypothesis length.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import LanguagePair, Segment
from .errors import ValidationError

_STRIP_CHARS = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip ASCII punctuation off token ends.

    Internal punctuation (don't, e.g. apostrophes) survives; tokens that are
    all punctuation vanish.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            tokens.append(tok)
    return tokens


def top_da_fraction(segments: Sequence[Segment], fraction: float) -> list[Segment]:
    """The ceil(fraction*n) highest-DA segments of each language pair.

    Ties at the cut go to the smaller segment id. Output is ordered by pair
    (first appearance), then descending DA, then id.
    """
    if not 0 < fraction <= 1:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    groups: dict[LanguagePair, list[Segment]] = {}
    for seg in segments:
        groups.setdefault(seg.pair, []).append(seg)
    out: list[Segment] = []
    for pair_segments in groups.values():
        keep = math.ceil(fraction * len(pair_segments))
        ranked = sorted(pair_segments, key=lambda s: (-s.da_score, s.id))
        out.extend(ranked[:keep])
    return out


def word_overlap_rate(hyp: str, ref: str) -> float:
    """Fraction of hypothesis tokens matched in the reference, clipped.

    Multiset counting: a hypothesis token repeated beyond its reference count
    stops matching. Empty hypotheses score 0.
    """
    hyp_tokens = tokenize(hyp)
    matched = sum((Counter(hyp_tokens) & Counter(tokenize(ref))).values())
    return matched / max(len(hyp_tokens), 1)


@dataclass(frozen=True)
class Vocabulary:
    """The token set an encoder maps to known-word representations."""

    source_name: str
    tokens: frozenset[str]

    def __post_init__(self):
        if not self.tokens:
            raise ValidationError(f"vocabulary {self.source_name!r} is empty")


def load_vocabulary(path, source_name: str | None = None) -> Vocabulary:
    """Read a one-token-per-line vocabulary file (blank lines ignored)."""
    path = Path(path)
    tokens = frozenset(
        line for line in path.read_text(encoding="utf-8").split("\n") if line
    )
    return Vocabulary(source_name=source_name or path.stem, tokens=tokens)


def oov_flag(segment: Segment, vocab: Vocabulary) -> bool:
    """True when any hypothesis token is unknown to the vocabulary."""
    return any(tok not in vocab.tokens for tok in tokenize(segment.hypothesis))


@dataclass(frozen=True)
class AnalysisConfig:
    top_fraction: float = 0.20
    overlap_threshold: float = 0.5
    short_length_max: int = 15
    high_quality_quantile: float = 0.8

    def __post_init__(self):
        if not 0 < self.top_fraction <= 1:
            raise ValidationError(f"top_fraction must be in (0, 1], got {self.top_fraction}")
        if not 0 <= self.overlap_threshold <= 1:
            raise ValidationError(
                f"overlap_threshold must be in [0, 1], got {self.overlap_threshold}"
            )
        if self.short_length_max < 1:
            raise ValidationError(f"short_length_max must be >= 1, got {self.short_length_max}")
        if not 0 < self.high_quality_quantile < 1:
            raise ValidationError(
                f"high_quality_quantile must be in (0, 1), got {self.high_quality_quantile}"
            )


@dataclass(frozen=True)
class DisagreementCounts:
    """Counts for segments rated high by exactly one metric."""

    total: int
    low_overlap: int
    oov: int
    oov_short: int
    oov_long: int


@dataclass(frozen=True)
class AnalysisReport:
    config: AnalysisConfig
    metric_a: str
    metric_b: str
    n_analyzed: int
    only_a: DisagreementCounts
    only_b: DisagreementCounts
    per_pair_n: dict[LanguagePair, int] = field(default_factory=dict)


def _quantile_thresholds(
    scores: Mapping[str, float],
    segments: Sequence[Segment],
    quantile: float,
) -> dict[LanguagePair, float]:
    # method="lower" keeps the threshold an actual data point, so the
    # classification is invariant under strictly increasing score transforms.
    by_pair: dict[LanguagePair, list[float]] = {}
    for seg in segments:
        by_pair.setdefault(seg.pair, []).append(scores[seg.id])
    return {
        pair: float(np.quantile(vals, quantile, method="lower"))
        for pair, vals in by_pair.items()
    }


def _count_side(
    side: list[Segment], config: AnalysisConfig, vocab: Vocabulary
) -> DisagreementCounts:
    low_overlap = 0
    oov = oov_short = oov_long = 0
    for seg in side:
        if word_overlap_rate(seg.hypothesis, seg.reference) < config.overlap_threshold:
            low_overlap += 1
        if oov_flag(seg, vocab):
            oov += 1
            if len(tokenize(seg.hypothesis)) <= config.short_length_max:
                oov_short += 1
            else:
                oov_long += 1
    return DisagreementCounts(
        total=len(side), low_overlap=low_overlap, oov=oov, oov_short=oov_short, oov_long=oov_long
    )


def disagreement_report(
    scores_a: Mapping[str, float],
    scores_b: Mapping[str, float],
    segments: Sequence[Segment],
    config: AnalysisConfig,
    vocab: Vocabulary,
    metric_a: str = "A",
    metric_b: str = "B",
) -> AnalysisReport:
    """Compare two metrics on the top-DA slice of a corpus.

    Both score maps must cover every given segment. Swapping the metrics
    swaps the only-A/only-B sides exactly.
    """
    for name, scores in ((metric_a, scores_a), (metric_b, scores_b)):
        for seg in segments:
            if seg.id not in scores:
                raise ValidationError(f"metric {name!r} has no score for segment {seg.id!r}")

    q = config.high_quality_quantile
    thresholds_a = _quantile_thresholds(scores_a, segments, q)
    thresholds_b = _quantile_thresholds(scores_b, segments, q)

    top = top_da_fraction(segments, config.top_fraction)
    only_a: list[Segment] = []
    only_b: list[Segment] = []
    per_pair_n: dict[LanguagePair, int] = {}
    for seg in top:
        per_pair_n[seg.pair] = per_pair_n.get(seg.pair, 0) + 1
        high_a = scores_a[seg.id] >= thresholds_a[seg.pair]
        high_b = scores_b[seg.id] >= thresholds_b[seg.pair]
        if high_a and not high_b:
            only_a.append(seg)
        elif high_b and not high_a:
            only_b.append(seg)

    return AnalysisReport(
        config=config,
        metric_a=metric_a,
        metric_b=metric_b,
        n_analyzed=len(top),
        only_a=_count_side(only_a, config, vocab),
        only_b=_count_side(only_b, config, vocab),
        per_pair_n=per_pair_n,
    )


def write_analysis_report(report: AnalysisReport, path) -> None:
    """TSV sections: the config header, then one row per disagreement side."""
    c = report.config
    lines = [
        "# section\tkey\tvalue",
        f"config\ttop_fraction\t{c.top_fraction!r}",
        f"config\toverlap_threshold\t{c.overlap_threshold!r}",
        f"config\tshort_length_max\t{c.short_length_max}",
        f"config\thigh_quality_quantile\t{c.high_quality_quantile!r}",
        f"config\tn_analyzed\t{report.n_analyzed}",
        "# side\tmetric\ttotal\tlow_overlap\toov\toov_short\toov_long",
    ]
    for side, counts in (("only_a", report.only_a), ("only_b", report.only_b)):
        name = report.metric_a if side == "only_a" else report.metric_b
        lines.append(
            f"{side}\t{name}\t{counts.total}\t{counts.low_overlap}\t{counts.oov}"
            f"\t{counts.oov_short}\t{counts.oov_long}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def format_analysis_report(report: AnalysisReport) -> str:
    c = report.config
    out = [
        f"disagreements on the top {c.top_fraction:.0%} DA segments "
        f"({report.n_analyzed} segments, high = top quantile {c.high_quality_quantile})",
    ]
    for name, counts in ((report.metric_a, report.only_a), (report.metric_b, report.only_b)):
        out.append(
            f"  only {name} rates high: {counts.total}"
            f" | overlap < {c.overlap_threshold}: {counts.low_overlap}"
            f" | has unknown words: {counts.oov}"
            f" (short <= {c.short_length_max} tokens: {counts.oov_short}, "
            f"longer: {counts.oov_long})"
        )
    return "\n".join(out)
