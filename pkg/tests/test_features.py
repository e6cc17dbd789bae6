import math

import numpy as np
import pytest

from aljp.errors import DataError, EmbeddingFormatError, NotFittedError
from aljp.features import (
    PAD_ID,
    UNK_ID,
    EmbeddingStore,
    TfidfVectorizer,
    Vocabulary,
    average_embedding,
    encode_sequence,
    fit_vocab,
    load_embeddings,
    save_embeddings,
    tfidf_fit,
    tfidf_transform,
)
from aljp.numkit import RngState
from oracles import tfidf_brute_force


def random_corpus(rng: RngState, max_docs: int = 10, max_vocab: int = 8):
    alphabet = [f"w{i}" for i in range(1 + rng.randint(max_vocab))]
    n_docs = 1 + rng.randint(max_docs)
    return [
        [rng.choice(alphabet) for _ in range(1 + rng.randint(12))] for _ in range(n_docs)
    ]


class TestFitVocab:
    def test_hand_counts(self):
        vocab = fit_vocab([["a", "b"], ["b", "c"]], min_df=1)
        assert vocab.n_docs == 2
        assert set(vocab.token_index) == {"a", "b", "c"}
        assert vocab.df[vocab.token_index["a"]] == 1
        assert vocab.df[vocab.token_index["b"]] == 2
        assert vocab.df[vocab.token_index["c"]] == 1

    def test_min_df_filters(self):
        vocab = fit_vocab([["a", "b"], ["b", "c"]], min_df=2)
        assert set(vocab.token_index) == {"b"}

    def test_df_counts_document_once(self):
        vocab = fit_vocab([["a", "a", "a"], ["a"]])
        assert vocab.df[vocab.token_index["a"]] == 2

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            fit_vocab([])

    def test_indices_dense(self):
        vocab = fit_vocab([["z", "m", "a"]])
        assert sorted(vocab.token_index.values()) == [0, 1, 2]


class TestTfidf:
    def test_df_equals_n_gives_zero_vector(self):
        vec = tfidf_fit([["a", "b"], ["b", "c"]])
        sparse = vec.transform(["b", "b"])
        assert sparse.entries == []
        assert np.all(sparse.to_dense(3) == 0.0)

    def test_single_token_ln2(self):
        vec = tfidf_fit([["a", "b"], ["b", "c"]])
        entries = vec.transform(["a"]).entries
        assert len(entries) == 1
        assert entries[0][1] == pytest.approx(math.log(2.0), abs=1e-12)

    def test_oov_only_doc_is_empty(self):
        vec = tfidf_fit([["a", "b"], ["b", "c"]])
        assert vec.transform(["zzz", "qqq"]).entries == []

    def test_transform_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            TfidfVectorizer().transform(["a"])

    def test_idf_monotonicity(self):
        docs = [["a"], ["a", "b"], ["a", "b", "c"], ["a", "b", "c", "d"]]
        vec = tfidf_fit(docs)
        vocab = vec.vocab
        # df: a=4, b=3, c=2, d=1 -> idf strictly increasing as df decreases
        idf = {t: vec.idf[i] for t, i in vocab.token_index.items()}
        assert idf["d"] > idf["c"] > idf["b"] > idf["a"]
        assert idf["a"] == 0.0  # df == N

    def test_sparse_indices_strictly_increasing(self):
        rng = RngState(50)
        for _ in range(50):
            docs = random_corpus(rng)
            vec = tfidf_fit(docs)
            for doc in docs:
                indices = [i for i, _ in vec.transform(doc).entries]
                assert indices == sorted(set(indices))

    def test_matches_brute_force_oracle(self):
        rng = RngState(51)
        for _ in range(50):
            docs = random_corpus(rng)
            vec = tfidf_fit(docs)
            query = docs[rng.randint(len(docs))]
            expected = tfidf_brute_force(docs, query)
            dense = vec.transform(query).to_dense(len(vec.vocab))
            for token, weight in expected.items():
                got = dense[vec.vocab.token_index[token]]
                assert got == pytest.approx(weight, abs=1e-9)

    def test_l2_normalization_flag(self):
        vec = tfidf_fit([["a", "b"], ["c"]], l2_normalize=True)
        dense = vec.transform(["a", "b", "a"]).to_dense(len(vec.vocab))
        assert np.linalg.norm(dense) == pytest.approx(1.0, abs=1e-12)

    def test_serialization_round_trip(self):
        vec = tfidf_fit([["a", "b"], ["b", "c"]])
        clone = TfidfVectorizer.from_dict(vec.to_dict())
        doc = ["a", "b", "zzz"]
        assert clone.transform(doc).entries == vec.transform(doc).entries

    def test_module_level_helpers(self):
        vec = tfidf_fit([["a"], ["b"]])
        assert tfidf_transform(vec, ["a"]).entries == vec.transform(["a"]).entries


class TestEmbeddings:
    def test_fixture_round_trip(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\nكلمة 0.1 0.2 0.3\nword -1.0 0.5 2.25\n", encoding="utf-8")
        store = load_embeddings(path)
        assert store.dim == 3
        assert len(store) == 2
        assert np.allclose(store.get("كلمة"), [0.1, 0.2, 0.3])

    def test_arity_mismatch_raises(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("1 3\nword 0.1 0.2\n", encoding="utf-8")
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(path)

    def test_non_numeric_component_raises(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("1 2\nword 0.1 oops\n", encoding="utf-8")
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(path)

    def test_duplicate_token_last_wins(self, tmp_path, caplog):
        path = tmp_path / "vec.txt"
        path.write_text("2 1\nw 1.0\nw 2.0\n", encoding="utf-8")
        with caplog.at_level("WARNING"):
            store = load_embeddings(path)
        assert store.get("w")[0] == 2.0
        assert any("duplicate" in r.message for r in caplog.records)

    def test_absent_token_lookup(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("1 1\nw 1.0\n", encoding="utf-8")
        store = load_embeddings(path)
        assert store.get("missing") is None

    def test_save_load_exact(self, tmp_path):
        store = EmbeddingStore(dim=2, vectors={"a": np.array([0.1, -2.5]), "b": np.array([1e-9, 3.0])})
        path = tmp_path / "vec.txt"
        save_embeddings(store, path)
        loaded = load_embeddings(path)
        for token in store.vectors:
            assert (loaded.get(token) == store.get(token)).all()


class TestAverageEmbedding:
    def setup_method(self):
        self.store = EmbeddingStore(
            dim=2, vectors={"t1": np.array([1.0, 0.0]), "t2": np.array([0.0, 1.0])}
        )

    def test_mean_of_two(self):
        assert np.allclose(average_embedding(["t1", "t2"], self.store), [0.5, 0.5])

    def test_all_absent_gives_zero(self):
        assert np.array_equal(average_embedding(["x", "y"], self.store), [0.0, 0.0])

    def test_empty_gives_zero(self):
        assert np.array_equal(average_embedding([], self.store), [0.0, 0.0])

    def test_single_token_identity(self):
        assert np.array_equal(average_embedding(["t1"], self.store), [1.0, 0.0])

    def test_permutation_invariant(self):
        rng = RngState(60)
        tokens = ["t1", "t2", "x", "t1", "t2", "t2"]
        base = average_embedding(tokens, self.store)
        for _ in range(20):
            shuffled = list(tokens)
            rng.shuffle(shuffled)
            assert np.allclose(average_embedding(shuffled, self.store), base, atol=1e-12)


class TestEncodeSequence:
    def test_post_padding(self, tiny_vocab):
        # tokens c (idx 2 -> id 4) and e (idx 4 -> id 6), padded to 5
        ids = encode_sequence(["c", "e"], tiny_vocab, maxlen=5)
        assert ids.tolist() == [4, 6, PAD_ID, PAD_ID, PAD_ID]

    def test_head_truncation(self, tiny_vocab):
        ids = encode_sequence(["a", "b", "c", "d"], tiny_vocab, maxlen=3)
        assert ids.tolist() == [2, 3, 4]

    def test_unknown_token_gets_unk(self, tiny_vocab):
        ids = encode_sequence(["zzz"], tiny_vocab, maxlen=2)
        assert ids.tolist() == [UNK_ID, PAD_ID]

    def test_output_length_always_maxlen(self, tiny_vocab):
        rng = RngState(70)
        alphabet = list("abcdef") + ["oov1", "oov2"]
        for _ in range(200):
            maxlen = 1 + rng.randint(10)
            tokens = [rng.choice(alphabet) for _ in range(rng.randint(15))]
            ids = encode_sequence(tokens, tiny_vocab, maxlen=maxlen)
            assert len(ids) == maxlen
            assert ids.max(initial=0) < tiny_vocab.seq_vocab_size

    def test_bad_maxlen(self, tiny_vocab):
        with pytest.raises(DataError):
            encode_sequence(["a"], tiny_vocab, maxlen=0)


class TestVocabularySerialization:
    def test_round_trip(self):
        vocab = fit_vocab([["a", "b"], ["b", "c"]])
        clone = Vocabulary.from_dict(vocab.to_dict())
        assert clone.token_index == vocab.token_index
        assert (clone.df == vocab.df).all()
        assert clone.n_docs == vocab.n_docs
