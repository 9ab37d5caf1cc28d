import sys

import pytest

from prosodyx.audio_io import AudioBuffer, load_canonical
from prosodyx.compare import compare_features
from prosodyx.corpus import generate_fixture_corpus
from prosodyx.features import extract_features

from signals import SR, sawtooth


@pytest.fixture
def saw220():
    return AudioBuffer(sawtooth(220.0), SR)


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture")
    manifest = generate_fixture_corpus(root, seed=0)
    return root, manifest


@pytest.fixture(scope="session")
def fixture_features(fixture_corpus):
    _, manifest = fixture_corpus
    return [(extract_features(load_canonical(p.human_path)),
             extract_features(load_canonical(p.tts_path))) for p in manifest.pairs]


@pytest.fixture(scope="session")
def fixture_reports(fixture_features):
    return [compare_features(h, t) for h, t in fixture_features]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.result_lines():
        terminalreporter.write_line(line)
