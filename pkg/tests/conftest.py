import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from embmte.corpus import DACorpus, LanguagePair, Segment

REPO_ROOT = Path(__file__).parent.parent

# (criterion name, "PASS" | "FAIL") tuples recorded by test_acceptance.py.
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, status in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"[acceptance] {name}: {status}")


def run_cli(*args, env=None):
    """Invoke the installed CLI in a subprocess and capture output."""
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "embmte", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )

TABLE1_2015 = {"cs-en": 500, "de-en": 500, "fi-en": 500, "ru-en": 500}
TABLE1_2016 = {"cs-en": 560, "de-en": 560, "fi-en": 560, "ro-en": 560, "ru-en": 560, "tr-en": 560}


def make_segment(seg_id, pair="cs-en", dataset="wmt2016", system="sys1",
                 hyp="a translated sentence", ref="a reference sentence", da=0.0):
    return Segment(
        id=seg_id,
        pair=LanguagePair.parse(pair),
        dataset=dataset,
        system=system,
        hypothesis=hyp,
        reference=ref,
        da_score=da,
    )


def table1_corpus(rng=None):
    """A corpus shaped like the WMT-2015 + WMT-2016 DA collections."""
    rng = rng or np.random.Generator(np.random.PCG64(0))
    segments = []
    for dataset, counts in (("wmt2015", TABLE1_2015), ("wmt2016", TABLE1_2016)):
        for pair, count in counts.items():
            for i in range(count):
                segments.append(
                    make_segment(
                        f"{dataset}/{pair}/sys1/{i}",
                        pair=pair,
                        dataset=dataset,
                        da=float(rng.normal()),
                    )
                )
    return DACorpus(segments)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
