import os
from pathlib import Path

import numpy as np
import pytest

from ciprop import cigraph

# 6 papers, 8 binary word features, 3 classes; tab-separated like the
# original .content distribution.
CORA_GOLDEN = "\n".join(
    [
        "p100\t1\t0\t0\t1\t0\t0\t1\t0\tTheory",
        "p101\t0\t1\t0\t1\t0\t0\t0\t1\tNeural_Networks",
        "p102\t1\t1\t0\t0\t0\t1\t0\t0\tTheory",
        "p103\t0\t0\t1\t0\t1\t0\t0\t1\tRule_Learning",
        "p104\t0\t0\t1\t1\t0\t0\t1\t0\tNeural_Networks",
        "p105\t1\t0\t0\t0\t1\t1\t0\t0\tRule_Learning",
    ]
)

# 5 papers over a 4-word dictionary in the NODE.paper.tab layout: count
# line, field-declaration line, then sparse word=weight lines.
PUBMED_GOLDEN = "\n".join(
    [
        "5",
        "cat=label:label\tnumeric:w-insulin:0.0\tnumeric:w-glucose:0.0\tnumeric:w-rat:0.0\tnumeric:w-dose:0.0\tsummary",
        "9001\tlabel=1\tw-insulin=0.5\tw-rat=0.125\tsummary=x",
        "9002\tlabel=2\tw-glucose=0.25\tsummary=x",
        "9003\tlabel=3\tw-dose=1.0\tw-insulin=0.0625\tsummary=x",
        "9004\tlabel=1\tw-rat=0.75\tsummary=x",
        "9005\tlabel=2\tw-glucose=0.5\tw-dose=0.25\tsummary=x",
    ]
)


@pytest.fixture
def cora_file(tmp_path):
    path = tmp_path / "golden.content"
    path.write_text(CORA_GOLDEN + "\n")
    return path


@pytest.fixture
def pubmed_file(tmp_path):
    path = tmp_path / "golden.NODE.paper.tab"
    path.write_text(PUBMED_GOLDEN + "\n")
    return path


def random_pcorr(rng, d, scale=0.3):
    """Random symmetric matrix with zero diagonal and entries in (-1, 1);
    a valid partial-correlation-shaped input for the transition builders."""
    a = rng.uniform(-scale, scale, size=(d, d))
    p = (a + a.T) / 2.0
    np.fill_diagonal(p, 0.0)
    return cigraph.PartialCorrelationMatrix(P=p)


def data_dir():
    """Directory holding the real publication datasets, if any."""
    return Path(os.environ.get("CIPROP_DATA_DIR", Path(__file__).resolve().parent.parent / "data"))


def require_dataset(filename, hint):
    path = data_dir() / filename
    if not path.exists():
        pytest.skip(
            f"real dataset not present: put {filename} in {data_dir()} "
            f"(or set CIPROP_DATA_DIR); {hint}"
        )
    return path
