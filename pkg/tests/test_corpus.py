import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prosodyx.audio_io import AudioBuffer, read_wav, write_wav
from prosodyx.compare import compare_features
from prosodyx.corpus import (ANNOTATION_HEADER, FixtureSpec, StressAnnotation,
                             generate_fixture_corpus, load_annotations, load_manifest,
                             save_annotations)
from prosodyx.errors import (BrokenPairing, DuplicateId, HeaderMismatch, InvariantViolation,
                             MissingFile, RowArity, SchemaViolation)
from prosodyx.features import extract_features

HEADER = ",".join(ANNOTATION_HEADER)


def _two_pair_dir(root):
    for name in ("h1", "t1", "h2", "t2"):
        write_wav(root / f"{name}.wav", AudioBuffer(np.zeros(160), 16000))
    pairs = [{"id": "a", "human_path": "h1.wav", "tts_path": "t1.wav"},
             {"id": "b", "human_path": "h2.wav", "tts_path": "t2.wav"}]
    return {"language_tag": "ITA", "pairs": pairs}


def _write(root, data):
    path = root / "manifest.json"
    path.write_text(json.dumps(data))
    return path


def test_two_pair_manifest(tmp_path):
    m = load_manifest(_write(tmp_path, _two_pair_dir(tmp_path)))
    assert len(m) == 2
    assert m.language_tag == "ITA"
    assert m.pairs[1].tts_path == tmp_path / "t2.wav"


def test_missing_file_names_the_path(tmp_path):
    data = _two_pair_dir(tmp_path)
    data["pairs"][1]["tts_path"] = "nowhere.wav"
    with pytest.raises(MissingFile, match="nowhere.wav"):
        load_manifest(_write(tmp_path, data))


@pytest.mark.parametrize("data", [[], {"pairs": {}}, {"pairs": [{"id": "a"}]},
                                  {"pairs": [], "language_tag": 3},
                                  {"pairs": [{"id": "", "human_path": "x", "tts_path": "y"}]}])
def test_schema_violations(tmp_path, data):
    with pytest.raises(SchemaViolation):
        load_manifest(_write(tmp_path, data))


def test_invalid_json(tmp_path):
    p = tmp_path / "manifest.json"
    p.write_text("{not json")
    with pytest.raises(SchemaViolation):
        load_manifest(p)
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "absent.json")


MUTATIONS = {
    "duplicate_id": (DuplicateId, lambda d, i, j: d["pairs"][j].update(id=d["pairs"][i]["id"])),
    "broken_pairing": (BrokenPairing,
                       lambda d, i, j: d["pairs"][j].update(human_path=d["pairs"][i]["tts_path"])),
    "missing_file": (MissingFile, lambda d, i, j: d["pairs"][i].update(human_path="gone.wav")),
}


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(MUTATIONS)), st.integers(2, 6), st.data())
def test_manifest_rejects_mutations(tmp_path_factory, kind, n, data):
    root = tmp_path_factory.mktemp("m")
    pairs = []
    for k in range(n):
        for side in ("h", "t"):
            write_wav(root / f"{side}{k}.wav", AudioBuffer(np.zeros(80), 16000))
        pairs.append({"id": f"p{k}", "human_path": f"h{k}.wav", "tts_path": f"t{k}.wav"})
    d = {"language_tag": "GER", "pairs": pairs}
    assert len(load_manifest(_write(root, d))) == n
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda v: v != i))
    exc, mutate = MUTATIONS[kind]
    mutate(d, i, j)
    with pytest.raises(exc):
        load_manifest(_write(root, d))


def test_annotation_row(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text(HEADER + "\na.wav,3,3,2,HIGH|LOW|HIGH\n")
    (a,) = load_annotations(p)
    assert a == StressAnnotation("a.wav", 3, 3, 2, ("HIGH", "LOW", "HIGH"))


def test_annotation_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text(HEADER + "\na.wav,3,3,5,HIGH|LOW|HIGH\n")
    with pytest.raises(InvariantViolation):
        load_annotations(p)
    p.write_text(HEADER + "\na.wav,2,3,1,HIGH|LOW|HIGH\n")
    with pytest.raises(InvariantViolation):
        load_annotations(p)
    p.write_text(HEADER + "\na.wav,x,3,1,\n")
    with pytest.raises(InvariantViolation):
        load_annotations(p)
    p.write_text("filename,words\na.wav,3\n")
    with pytest.raises(HeaderMismatch):
        load_annotations(p)
    p.write_text(HEADER + "\na.wav,3,3\n")
    with pytest.raises(RowArity):
        load_annotations(p)


def test_header_only_is_empty(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text(HEADER + "\n")
    assert load_annotations(p) == []


_chars = st.characters(blacklist_categories=("Cs", "Cc"))
_label = st.text(st.characters(blacklist_characters="|", blacklist_categories=("Cs", "Cc")),
                 min_size=1, max_size=8)


@st.composite
def annotations(draw):
    labels = draw(st.lists(_label, max_size=5))
    lc = draw(st.integers(0, 10))
    return StressAnnotation(draw(st.text(_chars, min_size=1, max_size=12)),
                            len(labels), lc, draw(st.integers(0, lc)), tuple(labels))


@settings(max_examples=60, deadline=None)
@given(st.lists(annotations(), max_size=6))
def test_annotation_round_trip(tmp_path_factory, rows):
    # an empty label cell means "no labels", so a single empty label cannot survive
    rows = [r for r in rows if r.word_labels != ("",)]
    p = tmp_path_factory.mktemp("a") / "a.csv"
    save_annotations(p, rows)
    first = load_annotations(p)
    assert first == rows
    save_annotations(p, first)
    assert load_annotations(p) == first


def test_fixture_deterministic(tmp_path):
    spec = FixtureSpec(n_pairs=2, duration_s=0.3)
    a = generate_fixture_corpus(tmp_path / "a", seed=5, spec=spec)
    b = generate_fixture_corpus(tmp_path / "b", seed=5, spec=spec)
    for pa, pb in zip(a.pairs, b.pairs):
        assert pa.human_path.read_bytes() == pb.human_path.read_bytes()
        assert pa.tts_path.read_bytes() == pb.tts_path.read_bytes()
    c = generate_fixture_corpus(tmp_path / "c", seed=6, spec=spec)
    assert c.pairs[0].human_path.read_bytes() != a.pairs[0].human_path.read_bytes()


def test_fixture_manifest_reloads(fixture_corpus):
    m = load_manifest(fixture_corpus[0] / "manifest.json")
    assert len(m) == 8 and m.language_tag == "FIX"
    assert [a.filename for a in m.annotations] == [p.annotation_id for p in m.pairs]
    x = read_wav(m.pairs[0].human_path)
    assert x.sample_rate == 16000 and len(x) == 16000


def test_fixture_zero_offsets_self_identical(tmp_path):
    spec = FixtureSpec(n_pairs=3, pitch_offset_hz=0.0, duration_factor=1.0, energy_factor=1.0,
                       duration_s=0.5)
    m = generate_fixture_corpus(tmp_path, seed=1, spec=spec)
    for p in m.pairs:
        h = extract_features(read_wav(p.human_path))
        t = extract_features(read_wav(p.tts_path))
        assert compare_features(h, t).discrepancies == (0.0, 1.0, 1.0)


def test_fixture_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        generate_fixture_corpus(blocker / "sub")
