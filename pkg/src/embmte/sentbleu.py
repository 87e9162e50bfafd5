"""Smoothed sentence-level BLEU, the n-gram baseline metric.

Scores are the geometric mean of clipped n-gram precisions times a brevity
penalty. Under the default smoothing, numerator and denominator of every
precision of order n >= 2 get +1, so a perfect match still scores exactly 1.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .analysis import tokenize
from .corpus import DACorpus
from .errors import ValidationError
from .evaluation import MetricReport, evaluate_metric

SMOOTHING_MODES = ("add1_positive_n", "none")


@dataclass(frozen=True)
class BleuConfig:
    max_n: int = 4
    smoothing: str = "add1_positive_n"

    def __post_init__(self):
        if not 1 <= self.max_n <= 9:
            raise ValidationError(f"max_n must be in [1, 9], got {self.max_n}")
        if self.smoothing not in SMOOTHING_MODES:
            raise ValidationError(f"smoothing must be one of {SMOOTHING_MODES}")


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sent_bleu(hyp: str, ref: str, config: BleuConfig = BleuConfig()) -> float:
    """Sentence BLEU of a hypothesis against one reference, in [0, 1]."""
    hyp_tokens = tokenize(hyp)
    ref_tokens = tokenize(ref)
    if not hyp_tokens:
        return 0.0

    log_sum = 0.0
    for n in range(1, config.max_n + 1):
        hyp_counts = _ngram_counts(hyp_tokens, n)
        matched = sum((hyp_counts & _ngram_counts(ref_tokens, n)).values())
        total = sum(hyp_counts.values())
        if config.smoothing == "add1_positive_n" and n >= 2:
            matched += 1
            total += 1
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total)

    brevity = min(1.0, math.exp(1.0 - len(ref_tokens) / len(hyp_tokens)))
    return math.exp(log_sum / config.max_n) * brevity


def score_corpus(corpus: DACorpus, config: BleuConfig = BleuConfig()) -> dict[str, float]:
    """Per-segment sentence BLEU scores, keyed by segment id."""
    return {seg.id: sent_bleu(seg.hypothesis, seg.reference, config) for seg in corpus}


def sentbleu_report(corpus: DACorpus, config: BleuConfig = BleuConfig()) -> MetricReport:
    """Per-pair Pearson correlation of sentence BLEU against DA scores."""
    if len(corpus) == 0:
        raise ValidationError("corpus is empty")
    return evaluate_metric(score_corpus(corpus, config), corpus, corpus.pairs())
