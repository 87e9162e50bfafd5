import numpy as np
import pytest

from embmte.cli import main, parse_grid_spec
from embmte.corpus import parse_corpus
from embmte.embeddings import hyp_key, load_embeddings, ref_key, save_embeddings
from embmte.errors import ValidationError
from embmte.evaluation import read_scores
from embmte.svr import Hyperparams

from conftest import run_cli

SMALL_GRID = "c=1,10;eps=0.01,0.1;gamma=0.005,0.05"
TINY_GRID = "c=1;eps=0.1;gamma=0.005,0.05"


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    result = run_cli("synth", "--n", "200", "--dim", "8", "--noise-sigma", "0.05",
                     "--seed", "11", "--out-dir", str(out))
    assert result.returncode == 0, result.stderr
    return out


class TestGridSpec:
    def test_parse_order_and_values(self):
        grid = parse_grid_spec("c=10,1;eps=0.1;gamma=0.5,0.05")
        assert grid == [
            Hyperparams(1.0, 0.1, 0.05),
            Hyperparams(1.0, 0.1, 0.5),
            Hyperparams(10.0, 0.1, 0.05),
            Hyperparams(10.0, 0.1, 0.5),
        ]

    @pytest.mark.parametrize("bad", ["c=1;eps=0.1", "c=x;eps=1;gamma=1", "coolness=1"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValidationError):
            parse_grid_spec(bad)


class TestSynth:
    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            result = run_cli("synth", "--n", "50", "--dim", "4", "--seed", "3",
                             "--out-dir", str(out))
            assert result.returncode == 0, result.stderr
        assert (a / "corpus.tsv").read_bytes() == (b / "corpus.tsv").read_bytes()
        assert (a / "embeddings.emb1").read_bytes() == (b / "embeddings.emb1").read_bytes()

    def test_zero_noise_score_is_exact_function_of_vectors(self, tmp_path):
        result = run_cli("synth", "--n", "40", "--dim", "6", "--noise-sigma", "0",
                         "--seed", "5", "--out-dir", str(tmp_path))
        assert result.returncode == 0, result.stderr
        corpus = parse_corpus(tmp_path / "corpus.tsv")
        store = load_embeddings(tmp_path / "embeddings.emb1")
        for seg in corpus:
            t = np.asarray(store.lookup(hyp_key(seg.id)), dtype=np.float64)
            r = np.asarray(store.lookup(ref_key(seg.id)), dtype=np.float64)
            gap = t - r
            assert seg.da_score == float(np.exp(-(gap @ gap)))

    def test_too_small_rejected(self, tmp_path):
        result = run_cli("synth", "--n", "5", "--out-dir", str(tmp_path))
        assert result.returncode == 1
        assert result.stderr.startswith("error:")


@pytest.fixture(scope="module")
def trained(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    result = run_cli(
        "train", "--corpus", str(synth_dir / "corpus.tsv"),
        "--embeddings", str(synth_dir / "embeddings.emb1"),
        "--target-pair", "aa-en", "--test-dataset", "synth",
        "--folds", "5", "--grid", SMALL_GRID, "--out-dir", str(out),
    )
    assert result.returncode == 0, result.stderr
    return out


class TestTrainEvaluate:
    def test_train_emits_artifacts_and_choice(self, trained):
        assert (trained / "model.svr1").exists()
        assert (trained / "model.std1").exists()
        table = (trained / "cv_grid.tsv").read_text().strip().split("\n")
        grid_rows = [l for l in table[1:] if not l.startswith("#")]
        assert len(grid_rows) == 8

    def test_evaluate_recovers_signal(self, synth_dir, trained, tmp_path):
        result = run_cli(
            "evaluate", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--model", str(trained / "model.svr1"), "--out-dir", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        report = (tmp_path / "report.tsv").read_text().strip().split("\n")
        pair_row = report[1].split("\t")
        assert pair_row[0] == "aa-en"
        assert float(pair_row[2]) >= 0.85
        scores = read_scores(tmp_path / "scores.tsv")
        assert len(scores) == 50  # 200 segments over 4 pairs

    def test_oracle_da_mode_gives_perfect_correlation(self, synth_dir, trained, tmp_path):
        result = run_cli(
            "evaluate", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--model", str(trained / "model.svr1"), "--oracle-da",
            "--out-dir", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        report = (tmp_path / "report.tsv").read_text().strip().split("\n")
        held_out = float(report[1].split("\t")[2])
        assert held_out >= 1.0 - 1e-12  # exactly 1 in math, clamped FP in practice

    def test_missing_pair_is_input_error(self, synth_dir, trained, tmp_path):
        result = run_cli(
            "evaluate", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "zz-en", "--test-dataset", "synth",
            "--model", str(trained / "model.svr1"), "--out-dir", str(tmp_path),
        )
        assert result.returncode == 1
        assert result.stderr.startswith("error:")

    def test_predict_scores_whole_corpus(self, synth_dir, trained, tmp_path):
        result = run_cli(
            "predict", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--model", str(trained / "model.svr1"), "--out-dir", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        assert len(read_scores(tmp_path / "scores.tsv")) == 200

    def test_singleton_grid_skips_search(self, synth_dir, tmp_path):
        result = run_cli(
            "train", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--grid", "c=1;eps=0.1;gamma=0.01", "--out-dir", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        table = (tmp_path / "cv_grid.tsv").read_text().strip().split("\n")
        assert len(table) == 1  # header only, no comparison ran
        assert "C=1.0 epsilon=0.1 gamma=0.01" in result.stdout

    def test_nonconvergence_exits_two(self, synth_dir, tmp_path):
        result = run_cli(
            "train", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--grid", "c=10;eps=0.01;gamma=0.005", "--max-iter", "3",
            "--out-dir", str(tmp_path),
        )
        assert result.returncode == 2
        assert result.stderr.startswith("error:")
        assert "did not converge" in result.stderr

    def test_missing_embedding_key_lists_offender(self, synth_dir, tmp_path):
        store = load_embeddings(synth_dir / "embeddings.emb1")
        keys = list(store.keys())
        partial = {k: store.lookup(k) for k in keys if not k.endswith("/000#hyp")}
        from embmte.embeddings import EmbeddingStore

        broken = EmbeddingStore(store.dim, partial, source_name="broken")
        broken_path = tmp_path / "broken.emb1"
        save_embeddings(broken, broken_path)
        result = run_cli(
            "train", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(broken_path),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--grid", TINY_GRID, "--out-dir", str(tmp_path),
        )
        assert result.returncode == 1
        assert "000#hyp" in result.stderr

    def test_train_determinism_and_parallel_equivalence(self, synth_dir, tmp_path):
        outs = [tmp_path / name for name in ("r1", "r2", "r3")]
        jobs = ["1", "1", "2"]
        for out, j in zip(outs, jobs):
            result = run_cli(
                "train", "--corpus", str(synth_dir / "corpus.tsv"),
                "--embeddings", str(synth_dir / "embeddings.emb1"),
                "--target-pair", "aa-en", "--test-dataset", "synth",
                "--folds", "4", "--grid", TINY_GRID, "--jobs", j,
                "--out-dir", str(out),
            )
            assert result.returncode == 0, result.stderr
        for name in ("model.svr1", "cv_grid.tsv", "model.std1"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
            assert (outs[0] / name).read_bytes() == (outs[2] / name).read_bytes()


class TestConfigFile:
    def test_file_supplies_values_and_flags_override(self, synth_dir, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text(
            "\n".join([
                f"corpus={synth_dir / 'corpus.tsv'}",
                f"embeddings={synth_dir / 'embeddings.emb1'}",
                "target-pair=aa-en",
                "test-dataset=synth",
                "folds=4",
                f"grid={TINY_GRID}  # comment survives parsing",
                "no-standardize=true",
            ])
        )
        out = tmp_path / "out"
        result = run_cli("train", "--config", str(config), "--folds", "3",
                         "--out-dir", str(out))
        assert result.returncode == 0, result.stderr
        header = (out / "cv_grid.tsv").read_text().split("\n")[0]
        assert header.endswith("fold_2")  # flag value 3 beat the file's 4
        assert not (out / "model.std1").exists()  # file's no-standardize applied

    def test_env_fallback_for_jobs(self, synth_dir, tmp_path):
        result = run_cli(
            "train", "--corpus", str(synth_dir / "corpus.tsv"),
            "--embeddings", str(synth_dir / "embeddings.emb1"),
            "--target-pair", "aa-en", "--test-dataset", "synth",
            "--folds", "3", "--grid", TINY_GRID, "--out-dir", str(tmp_path / "o"),
            env={"EMBMTE_JOBS": "2"},
        )
        assert result.returncode == 0, result.stderr


class TestBaselineAnalyze:
    def test_baseline_emits_scores_and_report(self, synth_dir, tmp_path):
        result = run_cli("baseline", "--corpus", str(synth_dir / "corpus.tsv"),
                         "--out-dir", str(tmp_path))
        assert result.returncode == 0, result.stderr
        scores = read_scores(tmp_path / "sentbleu_scores.tsv")
        assert len(scores) == 200
        report = (tmp_path / "sentbleu_report.tsv").read_text()
        assert report.startswith("pair\tn\tpearson")

    def test_analyze_round_trip(self, synth_dir, tmp_path):
        scores = tmp_path / "m.tsv"
        corpus = parse_corpus(synth_dir / "corpus.tsv")
        rows = ["seg_id\tscore"] + [f"{seg.id}\t{seg.da_score!r}" for seg in corpus]
        scores.write_text("\n".join(rows) + "\n")
        vocab = tmp_path / "vocab.txt"
        vocab.write_text("synthetic\nhypothesis\nreference\n")
        result = run_cli(
            "analyze", "--corpus", str(synth_dir / "corpus.tsv"),
            "--scores-a", str(scores), "--scores-b", str(scores),
            "--vocab", str(vocab), "--out-dir", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        text = (tmp_path / "analysis.tsv").read_text()
        assert "only_a\tm\t0\t" in text
        assert "only_b\tm\t0\t" in text

    def test_main_returns_zero_for_help(self):
        assert main(["--help"]) == 0

    def test_unknown_flag_is_validation_error(self):
        assert main(["synth", "--bogus"]) == 1
