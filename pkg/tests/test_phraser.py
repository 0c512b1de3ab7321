import pytest
from hypothesis import given, strategies as st

from agendaminer import phraser
from agendaminer.errors import ConfigError, ParseError


def _fixture_streams(phrase, repeats=50, fillers=0):
    """`repeats` sentences of the phrase plus single-token filler sentences."""
    streams = [list(phrase)] * repeats
    streams += [[f"filler{i}"] for i in range(fillers)]
    return streams


def test_learn_phrases_records_high_score_pair():
    # count(land)=count(tenure)=count(pair)=50, V=1000:
    # score = (50 - 15) * 1000 / (50 * 50) = 14.0 > 10.0
    streams = _fixture_streams(("land", "tenure"), repeats=50, fillers=998)
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=10.0, passes=1)
    assert table.passes[0][("land", "tenure")] == pytest.approx(14.0)


def test_learn_phrases_count_floor():
    streams = [["rare", "pair"]] + [[f"w{i}"] for i in range(100)]
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=0.0, passes=1)
    assert ("rare", "pair") not in table.passes[0]


def test_learn_phrases_below_threshold_not_recorded():
    # score = (50 - 15) * 4 / 2500 = 0.056 < 10 with a tiny vocabulary
    streams = _fixture_streams(("land", "tenure"), repeats=50, fillers=2)
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=10.0, passes=1)
    assert table.passes[0] == {}


def test_two_pass_trigram():
    streams = _fixture_streams(("forest", "landscape", "restoration"), repeats=50, fillers=997)
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=10.0, passes=2)
    out = phraser.apply(table, ["forest", "landscape", "restoration"])
    assert out == ["forest_landscape_restoration"]


def test_passes_outside_range_rejected():
    with pytest.raises(ConfigError):
        phraser.learn_phrases([["a", "b"]], passes=3)


def test_apply_single_merge():
    table = phraser.PhraseTable(passes=[{("land", "tenure"): 14.0}])
    assert phraser.apply(table, ["land", "tenure", "reform"]) == ["land_tenure", "reform"]


def test_apply_empty_list():
    table = phraser.PhraseTable(passes=[{("a", "b"): 11.0}])
    assert phraser.apply(table, []) == []


def test_apply_overlap_resolved_left_to_right():
    table = phraser.PhraseTable(passes=[{("a", "b"): 11.0, ("b", "c"): 11.0}])
    assert phraser.apply(table, ["a", "b", "c"]) == ["a_b", "c"]


def test_apply_is_idempotent():
    table = phraser.PhraseTable(passes=[{("a", "b"): 11.0}])
    once = phraser.apply(table, ["a", "b", "a", "b", "x"])
    assert phraser.apply(table, once) == once


def test_apply_never_lengthens():
    table = phraser.PhraseTable(passes=[{("a", "b"): 11.0}, {("a_b", "c"): 12.0}])
    tokens = ["a", "b", "c", "a", "d", "b"]
    assert len(phraser.apply(table, tokens)) <= len(tokens)


@given(st.lists(st.sampled_from(["land", "tenure", "reform", "soil"]), max_size=30))
def test_round_trip_recovers_tokens(tokens):
    table = phraser.PhraseTable(passes=[{("land", "tenure"): 14.0}, {("land_tenure", "reform"): 12.0}])
    merged = phraser.apply(table, tokens)
    flattened = [part for tok in merged for part in phraser.split_phrase(tok)]
    assert flattened == tokens


def test_table_roundtrip(tmp_path):
    streams = _fixture_streams(("forest", "landscape", "restoration"), repeats=50, fillers=997)
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=10.0, passes=2)
    path = tmp_path / "phrases.txt"
    table.save(path)
    loaded = phraser.PhraseTable.load(path)
    assert loaded.passes == table.passes


def test_table_load_rejects_malformed_line(tmp_path):
    path = tmp_path / "phrases.txt"
    path.write_text("only two\n", encoding="utf-8")
    with pytest.raises(ParseError, match="line 1"):
        phraser.PhraseTable.load(path)


def test_min_pair_count_enforced_in_table():
    streams = _fixture_streams(("land", "tenure"), repeats=50, fillers=998)
    table = phraser.learn_phrases(streams, min_pair_count=15, score_threshold=10.0, passes=2)
    # Underlying pair counts were all >= min_pair_count by construction.
    for merges in table.passes:
        for score in merges.values():
            assert score > 10.0
