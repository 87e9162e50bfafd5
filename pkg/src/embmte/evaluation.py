"""Segment-level Pearson correlation and per-language-pair metric reports."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import DACorpus, LanguagePair
from .errors import ValidationError


class ConstantInputWarning(UserWarning):
    """One input to pearson was constant; the correlation was reported as 0."""


def pearson(x, y) -> float:
    """Sample Pearson correlation, two-pass mean-centered, clamped to [-1, 1].

    If either input is constant the result is 0.0 and a ConstantInputWarning
    is issued instead of raising, so one degenerate cross-validation fold
    cannot abort a whole grid search.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"pearson needs two equal-length 1-D arrays, got {x.shape}, {y.shape}")
    if x.size < 2:
        raise ValidationError(f"pearson needs at least 2 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("pearson inputs must be finite")
    # Exact constancy test: mean-centering a constant array can leave ulp-size
    # residue, so sum-of-squares alone cannot detect this case.
    if x.min() == x.max() or y.min() == y.max():
        warnings.warn("constant input to pearson, returning 0", ConstantInputWarning, stacklevel=2)
        return 0.0
    # Corrected two-pass: a second centering pass removes the residual mean
    # that plain mean-centering leaves on poorly scaled data.
    xm = x - x.mean()
    xm -= xm.mean()
    ym = y - y.mean()
    ym -= ym.mean()
    sxx = float(xm @ xm)
    syy = float(ym @ ym)
    if sxx == 0.0 or syy == 0.0:
        warnings.warn("constant input to pearson, returning 0", ConstantInputWarning, stacklevel=2)
        return 0.0
    denom = float(np.sqrt(sxx * syy))
    if not np.isfinite(denom):  # sxx * syy overflowed
        denom = float(np.sqrt(sxx)) * float(np.sqrt(syy))
    r = float(xm @ ym) / denom
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class MetricReport:
    """Per-pair Pearson correlations plus their unweighted average."""

    per_pair: dict[LanguagePair, float]
    n_per_pair: dict[LanguagePair, int]
    average: float

    @classmethod
    def from_scores(
        cls, per_pair: Mapping[LanguagePair, float], n_per_pair: Mapping[LanguagePair, int]
    ) -> "MetricReport":
        if not per_pair:
            raise ValidationError("report needs at least one language pair")
        values = list(per_pair.values())
        return cls(
            per_pair=dict(per_pair),
            n_per_pair=dict(n_per_pair),
            average=sum(values) / len(values),
        )


def evaluate_metric(
    predictions: Mapping[str, float], corpus: DACorpus, pairs: Sequence[LanguagePair]
) -> MetricReport:
    """Correlate metric scores against DA per language pair.

    `predictions` must cover every corpus segment of every requested pair;
    a missing prediction is an error naming the segment id.
    """
    if not pairs:
        raise ValidationError("no language pairs requested")
    per_pair: dict[LanguagePair, float] = {}
    n_per_pair: dict[LanguagePair, int] = {}
    for pair in pairs:
        segs = [seg for seg in corpus if seg.pair == pair]
        if not segs:
            raise ValidationError(f"corpus has no segments for pair {pair}")
        scores = []
        for seg in segs:
            if seg.id not in predictions:
                raise ValidationError(f"missing prediction for segment {seg.id!r}")
            scores.append(predictions[seg.id])
        per_pair[pair] = pearson(scores, [seg.da_score for seg in segs])
        n_per_pair[pair] = len(segs)
    return MetricReport.from_scores(per_pair, n_per_pair)


def write_report(report: MetricReport, path) -> None:
    """Emit the report as TSV: pair, n, pearson, with a final avg row."""
    rows = ["pair\tn\tpearson"]
    for pair, r in report.per_pair.items():
        rows.append(f"{pair}\t{report.n_per_pair[pair]}\t{r!r}")
    rows.append(f"avg\t-\t{report.average!r}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def format_report(report: MetricReport, title: str = "Pearson correlation vs DA") -> str:
    """Pretty console table for a metric report."""
    lines = [title, "-" * len(title)]
    width = max([len(str(p)) for p in report.per_pair] + [4])
    for pair, r in report.per_pair.items():
        lines.append(f"{str(pair):<{width}}  n={report.n_per_pair[pair]:<6d} r={r:+.4f}")
    lines.append(f"{'avg':<{width}}  {'':9s} r={report.average:+.4f}")
    return "\n".join(lines)


def write_scores(scores: Mapping[str, float], path) -> None:
    """Emit per-segment scores as TSV: seg_id, score."""
    rows = ["seg_id\tscore"]
    rows.extend(f"{seg_id}\t{value!r}" for seg_id, value in scores.items())
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def read_scores(path) -> dict[str, float]:
    """Read a seg_id/score TSV written by write_scores."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "seg_id\tscore":
        raise ValidationError(f"{path}: expected header 'seg_id\\tscore'")
    scores: dict[str, float] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(f"{path}: line {line_no}: expected 2 columns")
        seg_id, value = parts
        try:
            scores[seg_id] = float(value)
        except ValueError:
            raise ValidationError(f"{path}: line {line_no}: bad score {value!r}") from None
    return scores
