import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from aljp import corpus, features


@pytest.fixture(scope="session")
def custody_spec():
    return corpus.default_synth_spec("custody", per_class=25)


@pytest.fixture(scope="session")
def custody_cases(custody_spec):
    return corpus.generate_synthetic(custody_spec, seed=42)


@pytest.fixture(scope="session")
def embedding_file(tmp_path_factory, custody_spec):
    store = corpus.synthetic_embeddings(custody_spec, dim=32, seed=42)
    path = tmp_path_factory.mktemp("emb") / "synth_vectors.txt"
    features.save_embeddings(store, path)
    return str(path)


@pytest.fixture()
def tiny_vocab():
    return features.Vocabulary(
        token_index={c: i for i, c in enumerate("abcdef")},
        df=np.ones(6),
        n_docs=4,
    )


@pytest.fixture()
def case_file(tmp_path):
    """Two hand-authored annulment records."""
    lines = [
        '{"id": "a-1", "case_type": "annulment", "claim": "ادعت المدعية الخلع",'
        ' "answer": "اجاب المدعى عليه بالرفض", "pleading": "جرت المرافعة حول الخلع بعوض",'
        ' "judgment": "فسخ نكاح لعوض", "evidence": "الخلع بعوض مالي"}',
        '{"id": "a-2", "case_type": "annulment", "claim": "ادعت المدعية الضرر",'
        ' "answer": "انكر المدعى عليه", "pleading": "ثبت الضرر وسوء العشرة",'
        ' "judgment": "فسخ نكاح بدون عوض", "evidence": "الضرر وسوء العشرة"}',
    ]
    path = tmp_path / "cases.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
