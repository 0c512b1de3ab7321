import hashlib
import math
import time

import numpy as np
import pytest

from agendaminer import skipgram
from agendaminer.errors import ConfigError, ParseError, ValidationError
from agendaminer.skipgram import (
    EmbeddingMatrix,
    TrainConfig,
    Vocabulary,
    build_vocab,
    generate_pairs,
    pair_loss_and_gradients,
    train,
)


def test_build_vocab_count_floor():
    streams = [["tree"] * 20 + ["rare"] * 3]
    vocab = build_vocab(streams, min_count=15)
    assert vocab.tokens == ["tree"]
    assert vocab.total_tokens == 23


def test_build_vocab_min_count_one_keeps_all():
    vocab = build_vocab([["a", "b", "b", "c"]], min_count=1)
    assert sorted(vocab.tokens) == ["a", "b", "c"]
    # dense indices 0..V-1 ordered by (-count, token)
    assert vocab.tokens[0] == "b"
    assert [vocab.index[t] for t in vocab.tokens] == [0, 1, 2]


def test_build_vocab_empty_corpus_rejected():
    with pytest.raises(ValidationError):
        build_vocab([], min_count=1)


def test_sampling_table_symmetry():
    vocab = Vocabulary(["a", "b"], [16, 16], 32)
    cum = vocab.sampling_cumulative
    assert cum[0] == pytest.approx(0.5)
    assert cum[1] == pytest.approx(1.0)


def test_negative_draw_distribution_matches_power_law():
    rng = np.random.default_rng(3)
    counts = [16, 40, 100, 250, 777, 1500, 4000, 16, 60, 90]
    vocab = Vocabulary([f"w{i}" for i in range(len(counts))], counts, sum(counts))
    n = 1_000_000
    draws = vocab.draw_negatives(rng, n)
    observed = np.bincount(draws, minlength=len(counts)) / n
    weights = np.array(counts, dtype=float) ** 0.75
    expected = weights / weights.sum()
    assert np.max(np.abs(observed - expected) / expected) < 0.02


def test_generate_pairs_window_one():
    pairs = generate_pairs([0, 1, 2], window=1)
    assert pairs == [(0, 1), (1, 0), (1, 2), (2, 1)]


def test_generate_pairs_single_token():
    assert generate_pairs([0], window=5) == []


def test_generate_pairs_boundary_clipping():
    pairs = generate_pairs([0, 1, 2, 3], window=3)
    first_center = [p for p in pairs if p[0] == 0]
    assert first_center == [(0, 1), (0, 2), (0, 3)]


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(11)
    dim, k = 8, 2
    v = rng.normal(scale=0.5, size=dim)
    rows = rng.normal(scale=0.5, size=(1 + k, dim))
    labels = np.zeros(1 + k)
    labels[0] = 1.0
    loss, grad_v, grad_rows = pair_loss_and_gradients(v, rows, labels)

    h = 1e-5

    def loss_at(vv, rr):
        return pair_loss_and_gradients(vv, rr, labels)[0]

    for i in range(dim):
        dv = np.zeros(dim)
        dv[i] = h
        fd = (loss_at(v + dv, rows) - loss_at(v - dv, rows)) / (2 * h)
        assert abs(fd - grad_v[i]) / max(1e-12, abs(fd)) < 1e-4
    for r in range(rows.shape[0]):
        for i in range(dim):
            dr = np.zeros_like(rows)
            dr[r, i] = h
            fd = (loss_at(v, rows + dr) - loss_at(v, rows - dr)) / (2 * h)
            assert abs(fd - grad_rows[r, i]) / max(1e-12, abs(fd)) < 1e-4


def _template_corpus(rng, families, contexts_per_family=18, occurrences=400):
    """Token families dropped into family-specific context templates."""
    streams = []
    for fam_idx, members in enumerate(families):
        pool = [f"ctx{fam_idx}_{i}" for i in range(contexts_per_family)]
        for _ in range(occurrences):
            member = members[int(rng.integers(0, len(members)))]
            picks = [pool[int(rng.integers(0, len(pool)))] for _ in range(4)]
            streams.append([picks[0], picks[1], member, picks[2], picks[3]])
    return streams


def test_zero_epochs_returns_initialization():
    streams = [["a", "b", "c", "a", "b"]] * 4
    vocab = build_vocab(streams, min_count=1)
    cfg = TrainConfig(window=2, negatives=2, dim=4, epochs=0, seed=5, min_count=1)
    matrix = train(streams, vocab, cfg)
    rng = np.random.default_rng(5)
    expected = (rng.random((len(vocab), 4)) - 0.5) / 4
    assert np.array_equal(matrix.input_vectors, expected)
    assert np.array_equal(matrix.output_vectors, np.zeros((len(vocab), 4)))


def test_training_is_deterministic_single_worker():
    rng = np.random.default_rng(0)
    streams = _template_corpus(rng, [("xa", "xb")], occurrences=60)
    vocab = build_vocab(streams, min_count=1)
    cfg = TrainConfig(window=2, negatives=3, dim=16, epochs=2, seed=9, min_count=1)
    m1 = train(streams, vocab, cfg)
    m2 = train(streams, vocab, cfg)
    assert np.array_equal(m1.input_vectors, m2.input_vectors)
    assert np.array_equal(m1.output_vectors, m2.output_vectors)


def test_objective_improves_on_heldout_pairs():
    rng = np.random.default_rng(1)
    streams = _template_corpus(rng, [("xa", "xb"), ("ya", "yb")], occurrences=150)
    vocab = build_vocab(streams, min_count=1)
    held_out = []
    for toks in streams[:50]:
        idx = vocab.encode(toks)
        held_out.extend(generate_pairs(idx, window=2))
    cfg_init = TrainConfig(window=2, negatives=5, dim=24, epochs=0, seed=13, min_count=1)
    cfg_trained = TrainConfig(window=2, negatives=5, dim=24, epochs=3, seed=13, min_count=1)
    loss_init = skipgram.average_pair_loss(train(streams, vocab, cfg_init), held_out, 5, seed=99)
    loss_trained = skipgram.average_pair_loss(train(streams, vocab, cfg_trained), held_out, 5, seed=99)
    assert loss_trained < loss_init


def test_family_partners_become_neighbors():
    from agendaminer.retrieval import nearest_words

    rng = np.random.default_rng(2)
    streams = _template_corpus(rng, [("xa", "xb"), ("ya", "yb")], occurrences=300)
    vocab = build_vocab(streams, min_count=5)
    cfg = TrainConfig(window=2, negatives=5, dim=24, epochs=4, seed=21, min_count=5)
    matrix = train(streams, vocab, cfg)
    partners = {"xa": "xb", "xb": "xa", "ya": "yb", "yb": "ya"}
    for probe, partner in partners.items():
        top = [t for t, _ in nearest_words(matrix.vector(probe), matrix, k=3, exclude=[probe])]
        assert partner in top, f"{probe}: {top}"


def test_parallel_mode_trains_all_vectors():
    rng = np.random.default_rng(4)
    streams = _template_corpus(rng, [("xa", "xb")], occurrences=80)
    vocab = build_vocab(streams, min_count=1)
    cfg = TrainConfig(window=2, negatives=2, dim=8, epochs=1, seed=3, min_count=1, workers=2)
    matrix = train(streams, vocab, cfg)
    assert np.all(np.isfinite(matrix.input_vectors))
    assert np.all(np.linalg.norm(matrix.input_vectors, axis=1) > 0)


def test_vectors_finite_and_nonzero_after_training():
    streams = [["alpha", "beta", "gamma", "delta"] * 5] * 10
    vocab = build_vocab(streams, min_count=1)
    matrix = train(streams, vocab, TrainConfig(window=2, negatives=2, dim=8, epochs=2, seed=7, min_count=1))
    assert np.all(np.isfinite(matrix.input_vectors))
    assert np.all(np.isfinite(matrix.output_vectors))
    assert np.all(np.linalg.norm(matrix.input_vectors, axis=1) > 0)


# -- persistence ---------------------------------------------------------------


def _tiny_trained():
    streams = [["alpha", "beta", "gamma", "delta"] * 5] * 6
    vocab = build_vocab(streams, min_count=1)
    return train(streams, vocab, TrainConfig(window=2, negatives=2, dim=6, epochs=1, seed=2, min_count=1))


def test_text_roundtrip_within_tolerance(tmp_path):
    matrix = _tiny_trained()
    path = tmp_path / "emb.txt"
    skipgram.save_text(matrix, path)
    loaded = skipgram.load_text(path)
    assert loaded.vocab.tokens == matrix.vocab.tokens
    assert np.max(np.abs(loaded.input_vectors - matrix.input_vectors)) < 1e-6


def test_binary_roundtrip_bit_exact(tmp_path):
    matrix = _tiny_trained()
    path = tmp_path / "emb.bin"
    skipgram.save_binary(matrix, path)
    loaded = skipgram.load_binary(path)
    assert loaded.vocab.tokens == matrix.vocab.tokens
    assert np.array_equal(loaded.input_vectors, matrix.input_vectors.astype("<f4"))
    # A second save of the loaded matrix is byte-identical.
    path2 = tmp_path / "emb2.bin"
    skipgram.save_binary(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_text_header_count_mismatch(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("2 3\na 1 2 3\nb 1 2 3\nc 1 2 3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        skipgram.load_text(path)


def test_text_non_numeric_entry_names_line(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("2 3\na 1 2 3\nb 1 oops 3\n", encoding="utf-8")
    with pytest.raises(ParseError, match="line 3"):
        skipgram.load_text(path)


def test_loaded_vocab_cannot_sample():
    streams = [["a", "b"] * 10]
    vocab = Vocabulary(["a", "b"], None, 0)
    with pytest.raises(ValidationError):
        vocab.sampling_cumulative


def test_same_seed_same_checksum(tmp_path):
    streams = [["alpha", "beta", "gamma", "delta"] * 5] * 6
    vocab = build_vocab(streams, min_count=1)
    cfg = TrainConfig(window=2, negatives=2, dim=6, epochs=1, seed=2, min_count=1)
    digests = []
    for name in ("a.txt", "b.txt"):
        matrix = train(streams, vocab, cfg)
        path = tmp_path / name
        skipgram.save_text(matrix, path)
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(window=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(negatives=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(dim=0).validate()
