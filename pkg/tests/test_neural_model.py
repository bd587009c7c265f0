import numpy as np
import pytest

from mtnorm.corpus import ContextWindow, LabeledSentence, NSWSpan, PAD_CHAR, extract_window
from mtnorm.neural import (
    CheckpointError,
    ClassifierConfig,
    Vocabulary,
    build_vocab,
    classify,
    embed_window,
    encode,
    init_params,
    load_char_vectors,
    load_params,
    masked_softmax,
    save_params,
)


def small_setup(window=8, dim=16, heads=2, labels=5, vocab_chars="零一二三456789时分比"):
    config = ClassifierConfig(
        window=window, heads=heads, model_dim=dim, ff_dim=2 * dim, label_count=labels, seed=1
    )
    vocab = Vocabulary({ch: i + 2 for i, ch in enumerate(vocab_chars)})
    params = init_params(config, vocab.size, np.random.default_rng(1))
    return config, vocab, params


class TestMaskedSoftmax:
    def test_random_pairs(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            n = rng.integers(2, 36)
            logits = rng.normal(scale=5.0, size=n)
            legal = rng.random(n) > 0.5
            legal[rng.integers(0, n)] = True
            probs = masked_softmax(logits, legal)[0]
            assert np.all(probs[~legal] == 0.0)
            assert abs(probs[legal].sum() - 1.0) <= 1e-9

    def test_single_legal_label_forced(self):
        probs = masked_softmax(np.asarray([5.0, -3.0, 0.1]), np.asarray([False, True, False]))[0]
        assert probs[1] == 1.0
        assert probs[0] == probs[2] == 0.0

    def test_all_illegal_rejected(self):
        with pytest.raises(ValueError):
            masked_softmax(np.zeros(4), np.zeros(4, dtype=bool))


class TestVocabulary:
    def test_pad_unk_distinct(self):
        with pytest.raises(ValueError):
            Vocabulary({}, pad_id=1, unk_id=1)

    def test_round_trip_ids(self):
        vocab = build_vocab([LabeledSentence("今天好", ())])
        for ch in "今天好":
            assert vocab.id_of(ch) >= 2
        assert vocab.id_of(PAD_CHAR) == vocab.pad_id
        assert vocab.id_of("未") == vocab.unk_id

    def test_pad_zero_variant(self):
        vocab = build_vocab([LabeledSentence("abc", ())], pad_id=0)
        assert vocab.pad_id == 0
        assert vocab.unk_id == 1


class TestEmbedding:
    def test_all_pad_window(self):
        config, vocab, params = small_setup()
        window = ContextWindow(PAD_CHAR * 8, (True,) * 8)
        emb = embed_window(window, vocab, params)
        expected = params.embedding[vocab.pad_id][None, :] + params.positional[:8]
        assert np.allclose(emb, expected)

    def test_locality(self):
        config, vocab, params = small_setup()
        w1 = ContextWindow("一二三四五678", (False,) * 4 + (True,) * 4)
        w2 = ContextWindow("一二三四五978", (False,) * 4 + (True,) * 4)
        e1 = embed_window(w1, vocab, params)
        e2 = embed_window(w2, vocab, params)
        diff = np.abs(e1 - e2).sum(axis=1)
        assert diff[5] > 0
        assert np.all(diff[np.arange(8) != 5] == 0)


class TestEncoderBlock:
    def test_output_shape_matches_input(self):
        _, _, params = small_setup()
        x = np.random.default_rng(0).normal(size=(8, 16))
        out, _ = encode(x, params)
        assert out.shape == x.shape

    def test_attention_rows_sum_over_non_pad(self):
        _, _, params = small_setup()
        x = np.random.default_rng(1).normal(size=(8, 16))
        pad = np.asarray([False] * 5 + [True] * 3)
        _, attn = encode(x, params, pad_mask=pad)
        assert np.allclose(attn.sum(axis=-1), 1.0)
        assert np.all(attn[:, :, pad] == 0.0)

    def test_permutation_equivariance(self):
        # brute-force check at D=4, H=2, W=3 with positional encoding removed
        config = ClassifierConfig(window=3, heads=2, model_dim=4, ff_dim=8, label_count=2, seed=2)
        params = init_params(config, vocab_size=6, rng=np.random.default_rng(2))
        x = np.random.default_rng(3).normal(size=(3, 4))
        perm = [2, 0, 1]
        out, _ = encode(x, params)
        out_perm, _ = encode(x[perm], params)
        assert np.allclose(out_perm, out[perm], atol=1e-10)


class TestClassify:
    def test_single_legal_forced(self):
        config, vocab, params = small_setup()
        window = ContextWindow("一二34五六七八", (False, False, True, True, False, False, False, False))
        legal = [False, False, True, False, False]
        probs, label = classify(window, vocab, params, config, legal)
        assert label == 2
        assert probs[2] == 1.0

    def test_distribution_sums_to_one(self):
        config, vocab, params = small_setup()
        window = ContextWindow("一二34五六七八", (False, False, True, True, False, False, False, False))
        probs, _ = classify(window, vocab, params, config, [True] * 5)
        assert abs(probs.sum() - 1.0) <= 1e-9

    def test_masking_out_argmax_changes_argmax(self):
        config, vocab, params = small_setup()
        window = ContextWindow("一二34五六七八", (False, False, True, True, False, False, False, False))
        legal = [True] * 5
        probs, label = classify(window, vocab, params, config, legal)
        reduced = list(legal)
        reduced[label] = False
        probs2, label2 = classify(window, vocab, params, config, reduced)
        assert label2 != label
        assert probs2[label] == 0.0

    def test_empty_mask_raises(self):
        config, vocab, params = small_setup()
        window = ContextWindow("一二34五六七八", (False,) * 2 + (True,) * 2 + (False,) * 4)
        with pytest.raises(ValueError):
            classify(window, vocab, params, config, [False] * 5)

    def test_changes_outside_window_are_invisible(self):
        config, vocab, params = small_setup(window=6)
        far_a = "甲" * 30
        far_b = "乙" * 30
        for tail in ("", "后缀"):
            s1 = LabeledSentence(far_a + "今天56点了" + tail, (NSWSpan(32, 34),))
            s2 = LabeledSentence(far_b + "今天56点了" + tail, (NSWSpan(32, 34),))
            w1 = extract_window(s1, s1.spans[0], 6)
            w2 = extract_window(s2, s2.spans[0], 6)
            p1, l1 = classify(w1, vocab, params, config, [True] * 5)
            p2, l2 = classify(w2, vocab, params, config, [True] * 5)
            assert l1 == l2
            assert np.allclose(p1, p2)


class TestCheckpoint:
    def test_round_trip_identical(self, tmp_path):
        config, vocab, params = small_setup()
        path = str(tmp_path / "model.npz")
        save_params(path, params, config, vocab)
        loaded, config2, vocab2 = load_params(path)
        for name, tensor in params.tensors().items():
            assert np.array_equal(loaded.tensors()[name], tensor)
        assert config2 == config
        assert vocab2 == vocab

    def test_wrong_label_count_rejected(self, tmp_path):
        config, vocab, params = small_setup()
        path = str(tmp_path / "model.npz")
        save_params(path, params, config, vocab)
        import json

        import numpy as np_

        archive = dict(np_.load(path, allow_pickle=False))
        bad = json.loads(str(archive["config_json"]))
        bad["label_count"] = 9
        archive["config_json"] = np_.asarray(json.dumps(bad))
        np_.savez(path, **archive)
        with pytest.raises(CheckpointError, match="shape"):
            load_params(path)

    def test_truncated_file_rejected(self, tmp_path):
        config, vocab, params = small_setup()
        path = str(tmp_path / "model.npz")
        save_params(path, params, config, vocab)
        blob = open(path, "rb").read()
        open(path, "wb").write(blob[: len(blob) // 2])
        with pytest.raises(CheckpointError):
            load_params(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = str(tmp_path / "junk.npz")
        np.savez(path, something=np.zeros(3))
        with pytest.raises(CheckpointError, match="not a classifier checkpoint"):
            load_params(path)


class TestPretrainedVectors:
    def test_load_overwrites_known_rows(self, tmp_path):
        config, vocab, params = small_setup()
        path = tmp_path / "vectors.txt"
        row = " ".join(["0.5"] * config.model_dim)
        path.write_text(f"一 {row}\n不 {row}\n", encoding="utf-8")
        loaded = load_char_vectors(str(path), vocab, config.model_dim, params.embedding)
        assert loaded == 1  # only 一 is in the vocabulary
        assert np.allclose(params.embedding[vocab.char_to_id["一"]], 0.5)

    def test_dimension_mismatch(self, tmp_path):
        config, vocab, params = small_setup()
        path = tmp_path / "vectors.txt"
        path.write_text("一 0.5 0.5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected"):
            load_char_vectors(str(path), vocab, config.model_dim, params.embedding)
