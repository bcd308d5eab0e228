import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

FIXTURES = Path(__file__).parent.parent / "src" / "wsner" / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mini_wiki(fixtures_dir) -> Path:
    return fixtures_dir / "mini_wiki.tsv"


@pytest.fixture(scope="session")
def gazetteer_path(fixtures_dir) -> Path:
    return fixtures_dir / "gazetteer.tsv"


@pytest.fixture(scope="session")
def inventory_path(fixtures_dir) -> Path:
    return fixtures_dir / "mini_wiki_inventory.tsv"


@pytest.fixture(scope="session")
def golden_annotate(fixtures_dir) -> Path:
    return fixtures_dir / "golden_annotate.conll"


@pytest.fixture(scope="session")
def golden_correction(fixtures_dir) -> Path:
    return fixtures_dir / "golden_correction.tsv"


@pytest.fixture(scope="session")
def correction_train(fixtures_dir) -> Path:
    return fixtures_dir / "correction_train.tsv"
