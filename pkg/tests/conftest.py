import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import PAPERS_MAPPING, papers_workbook_bytes  # noqa: E402


@pytest.fixture(scope="session")
def papers_dir(tmp_path_factory) -> Path:
    """Directory holding the paper-scores mapping and its workbook."""
    root = tmp_path_factory.mktemp("papers")
    (root / "workbook.xlsx").write_bytes(papers_workbook_bytes())
    (root / "mapping.ttl").write_text(PAPERS_MAPPING, encoding="utf-8")
    return root
