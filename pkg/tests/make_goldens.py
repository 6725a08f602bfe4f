"""Regenerate the golden corpus and reports under tests/golden/.

Run from the repository root after an intentional behaviour change:

    python tests/make_goldens.py

The numpy kernel backend is pinned so goldens are valid in environments
without numba.
"""

from __future__ import annotations

import os
import shutil
import sys
from pathlib import Path

os.environ["GALLERYFLOW_KERNELS"] = "numpy"

from galleryflow.cli import main  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
CORPUS = GOLDEN / "corpus"
REPORTS = GOLDEN / "reports"


def regenerate():
    for path in (CORPUS, REPORTS):
        if path.exists():
            shutil.rmtree(path)
    code = main([
        "synth", "--preset", "demo", "--seed", "20160701",
        "--trips", "60", "--n-reviews", "40", "--outdir", str(CORPUS),
    ])
    assert code == 0, "synth failed"
    code = main([
        "all",
        "--events", str(CORPUS / "events.jsonl"),
        "--reviews", str(CORPUS / "reviews.jsonl"),
        "--outdir", str(REPORTS),
    ])
    assert code == 0, "all failed"
    print(f"goldens refreshed under {GOLDEN}")


if __name__ == "__main__":
    sys.exit(regenerate())
