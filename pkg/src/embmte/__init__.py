"""Segment-level MT evaluation from universal sentence representations.

Match features built from hypothesis/reference sentence vectors feed an
RBF-kernel epsilon-SVR trained on direct-assessment human scores; quality is
reported as per-language-pair Pearson correlation, with a smoothed sentence
BLEU baseline and a metric-disagreement error analysis alongside.
"""

from .analysis import (
    AnalysisConfig,
    AnalysisReport,
    Vocabulary,
    disagreement_report,
    format_analysis_report,
    load_vocabulary,
    oov_flag,
    tokenize,
    top_da_fraction,
    word_overlap_rate,
    write_analysis_report,
)
from .corpus import (
    DACorpus,
    LanguagePair,
    Segment,
    SplitSpec,
    kfold_assign,
    leave_one_pair_out_split,
    parse_corpus,
    write_corpus,
)
from .embeddings import (
    EmbeddingKey,
    EmbeddingStore,
    combine_sources,
    hyp_key,
    load_embeddings,
    ref_key,
    save_embeddings,
)
from .errors import (
    ConvergenceError,
    CorpusParseError,
    EmbeddingFormatError,
    EmbmteError,
    MissingKeysError,
    ValidationError,
)
from .evaluation import (
    ConstantInputWarning,
    MetricReport,
    evaluate_metric,
    format_report,
    pearson,
    read_scores,
    write_report,
    write_scores,
)
from .features import (
    Standardizer,
    apply_standardizer,
    combined_permutation,
    feature_matrix,
    fit_standardizer,
    match_features,
)
from .sentbleu import BleuConfig, score_corpus, sent_bleu, sentbleu_report
from .svr import (
    CVResult,
    Hyperparams,
    KKTReport,
    SVRModel,
    check_kkt,
    default_grid,
    dual_objective,
    grid_search,
    kkt_violations,
    load_model,
    rbf_kernel,
    save_model,
    svr_predict,
    svr_predict_batch,
    svr_train,
)

__version__ = "0.1.0"
