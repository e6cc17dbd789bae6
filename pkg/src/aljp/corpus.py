"""Case data model, JSONL ingestion, stratified splitting, and a synthetic corpus.

The record schema is one JSON object per line with fields
``id, case_type, claim, answer, pleading, judgment, evidence``; the two
label fields hold class-name strings resolved against a label catalog.
The synthetic generator stands in for the original court collections: it
produces keyword-separable cases (every case carries at least one keyword
of its own class and none of any other class) salted with filler text,
decoy dates, and diacritics so the preprocessing stages have real work.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, UnknownLabelError
from .features import SEPARATOR_TOKEN, EmbeddingStore
from .numkit import RngState

__all__ = [
    "CASE_TYPES",
    "TASKS",
    "LabelClass",
    "LabelCatalog",
    "Case",
    "CaseSet",
    "SplitPair",
    "SynthClass",
    "SynthSpec",
    "load_catalogs",
    "get_catalog",
    "load_cases",
    "save_cases",
    "split_stratified",
    "default_synth_spec",
    "generate_synthetic",
    "synthetic_embeddings",
]

CASE_TYPES = ("custody", "annulment")
TASKS = ("judgment", "evidence", "probability")

# Class counts in the source collections, kept for reporting.
COLLECTION_COUNTS = {
    "ministry": {"custody": 20, "annulment": 29},
    "simulated": {"custody": 55, "annulment": 24},
}

_EXPECTED_CLASS_COUNTS = {
    ("judgment", "custody"): 4,
    ("judgment", "annulment"): 4,
    ("probability", "custody"): 4,
    ("probability", "annulment"): 4,
    ("evidence", "custody"): 8,
    ("evidence", "annulment"): 11,
}

_RECORD_FIELDS = ("id", "case_type", "claim", "answer", "pleading", "judgment", "evidence")


@dataclass(frozen=True)
class LabelClass:
    name: str  # Arabic class name, the authoritative key
    gloss: str = ""  # English gloss for display


@dataclass(frozen=True)
class LabelCatalog:
    """Ordered class list for one (task, case_type) pair."""

    task: str
    case_type: str
    classes: tuple

    def __post_init__(self):
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.case_type not in CASE_TYPES:
            raise DataError(f"unknown case_type {self.case_type!r}")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate class names in {self.task}/{self.case_type} catalog")
        expected = _EXPECTED_CLASS_COUNTS.get((self.task, self.case_type))
        if expected is not None and len(self.classes) != expected:
            raise DataError(
                f"{self.task}/{self.case_type} catalog must have {expected} classes, "
                f"got {len(self.classes)}"
            )

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.classes):
            if c.name == name:
                return i
        raise UnknownLabelError(f"label {name!r} not in {self.task}/{self.case_type} catalog")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "case_type": self.case_type,
            "classes": [{"name": c.name, "gloss": c.gloss} for c in self.classes],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LabelCatalog":
        classes = tuple(LabelClass(c["name"], c.get("gloss", "")) for c in raw["classes"])
        return cls(task=raw["task"], case_type=raw["case_type"], classes=classes)


def load_catalogs(path=None) -> dict:
    """Catalog file -> {(task, case_type): LabelCatalog}. None loads the packaged defaults."""
    if path is None:
        text = resources.files("aljp").joinpath("data/catalogs.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    catalogs = {}
    for raw in json.loads(text):
        cat = LabelCatalog.from_dict(raw)
        catalogs[(cat.task, cat.case_type)] = cat
    return catalogs


def get_catalog(task: str, case_type: str, path=None) -> LabelCatalog:
    catalogs = load_catalogs(path)
    key = (task, case_type)
    if key not in catalogs:
        raise DataError(f"no catalog for task={task!r} case_type={case_type!r}")
    return catalogs[key]


@dataclass(frozen=True)
class Case:
    """One legal case: the three texts plus resolved label indices."""

    id: str
    case_type: str
    claim_text: str
    answer_text: str
    pleading_text: str
    judgment_label: int
    evidence_label: int


@dataclass
class CaseSet:
    """Immutable-by-convention collection of same-type cases."""

    cases: list
    case_type: str
    judgment_catalog: LabelCatalog
    evidence_catalog: LabelCatalog
    provenance: str = "synthetic"  # ministry | simulated | synthetic

    def __post_init__(self):
        for case in self.cases:
            if case.case_type != self.case_type:
                raise DataError(
                    f"case {case.id!r} has case_type {case.case_type!r}, "
                    f"set is {self.case_type!r}"
                )
            if not 0 <= case.judgment_label < len(self.judgment_catalog):
                raise DataError(f"case {case.id!r}: judgment label index out of range")
            if not 0 <= case.evidence_label < len(self.evidence_catalog):
                raise DataError(f"case {case.id!r}: evidence label index out of range")

    def __len__(self) -> int:
        return len(self.cases)

    def labels(self, task: str) -> list[int]:
        if task in ("judgment", "probability"):
            return [c.judgment_label for c in self.cases]
        if task == "evidence":
            return [c.evidence_label for c in self.cases]
        raise DataError(f"unknown task {task!r}")

    def catalog(self, task: str) -> LabelCatalog:
        return self.evidence_catalog if task == "evidence" else self.judgment_catalog

    def subset(self, indices) -> "CaseSet":
        return CaseSet(
            cases=[self.cases[i] for i in indices],
            case_type=self.case_type,
            judgment_catalog=self.judgment_catalog,
            evidence_catalog=self.evidence_catalog,
            provenance=self.provenance,
        )


@dataclass
class SplitPair:
    train: CaseSet
    test: CaseSet
    seed: int
    test_fraction: float


def load_cases(path, catalogs: dict | None = None, provenance: str = "ministry") -> CaseSet:
    """Read a JSONL case file, resolving label strings through the catalogs."""
    if catalogs is None:
        catalogs = load_catalogs()
    cases: list[Case] = []
    case_type: str | None = None
    if not Path(path).exists():
        raise DataError(f"case file {path!r} not found")
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed record on line {lineno}: {exc}") from exc
            record_id = raw.get("id", f"<line {lineno}>")
            for fieldname in _RECORD_FIELDS:
                if fieldname not in raw:
                    raise DataError(f"record {record_id}: missing field {fieldname!r}")
            if raw["case_type"] not in CASE_TYPES:
                raise DataError(f"record {record_id}: unknown case_type {raw['case_type']!r}")
            if case_type is None:
                case_type = raw["case_type"]
            elif raw["case_type"] != case_type:
                raise DataError(
                    f"record {record_id}: case_type {raw['case_type']!r} differs from "
                    f"{case_type!r} seen earlier"
                )
            if not raw["pleading"] and not (raw["claim"] and raw["answer"]):
                raise DataError(
                    f"record {record_id}: needs a pleading text or both claim and answer texts"
                )
            jcat = catalogs[("judgment", case_type)]
            ecat = catalogs[("evidence", case_type)]
            try:
                judgment_idx = jcat.index_of(raw["judgment"])
            except UnknownLabelError as exc:
                raise UnknownLabelError(
                    f"record {record_id}: unknown judgment label {raw['judgment']!r}"
                ) from exc
            try:
                evidence_idx = ecat.index_of(raw["evidence"])
            except UnknownLabelError as exc:
                raise UnknownLabelError(
                    f"record {record_id}: unknown evidence label {raw['evidence']!r}"
                ) from exc
            cases.append(
                Case(
                    id=str(raw["id"]),
                    case_type=case_type,
                    claim_text=raw["claim"],
                    answer_text=raw["answer"],
                    pleading_text=raw["pleading"],
                    judgment_label=judgment_idx,
                    evidence_label=evidence_idx,
                )
            )
    if not cases:
        raise DataError(f"{path}: no records")
    return CaseSet(
        cases=cases,
        case_type=case_type,
        judgment_catalog=catalogs[("judgment", case_type)],
        evidence_catalog=catalogs[("evidence", case_type)],
        provenance=provenance,
    )


def save_cases(caseset: CaseSet, path) -> None:
    """Write the canonical JSONL form (stable field order; save-load-save is a fixed point)."""
    with open(path, "w", encoding="utf-8") as handle:
        for case in caseset.cases:
            record = {
                "id": case.id,
                "case_type": case.case_type,
                "claim": case.claim_text,
                "answer": case.answer_text,
                "pleading": case.pleading_text,
                "judgment": caseset.judgment_catalog.classes[case.judgment_label].name,
                "evidence": caseset.evidence_catalog.classes[case.evidence_label].name,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def split_stratified(
    caseset: CaseSet,
    test_fraction: float,
    seed: int,
    by: str = "judgment",
) -> SplitPair:
    """Deterministic stratified split; per-class test counts within +-1 of fraction*size.

    The overall test size is round(fraction * n); per-class counts come from
    largest-remainder allocation so the total is hit exactly.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise DataError(f"test_fraction must be in [0, 1), got {test_fraction}")
    labels = caseset.labels(by)
    by_class: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(idx)
    if test_fraction > 0.0:
        for lab, members in sorted(by_class.items()):
            if len(members) < 2:
                raise DataError(
                    f"class {lab} has {len(members)} member(s); need >= 2 to stratify"
                )
    total = len(caseset)
    target_total = round(test_fraction * total)
    exact = {lab: test_fraction * len(m) for lab, m in by_class.items()}
    counts = {lab: int(exact[lab]) for lab in by_class}
    deficit = target_total - sum(counts.values())
    # Hand out the remainder by largest fractional part, ties to the larger class
    # then the lower label, so allocation is order-independent.
    order = sorted(
        by_class,
        key=lambda lab: (-(exact[lab] - counts[lab]), -len(by_class[lab]), lab),
    )
    for lab in order[:deficit]:
        counts[lab] += 1
    rng = RngState(seed, stream=11)
    test_idx: list[int] = []
    for lab in sorted(by_class):
        members = list(by_class[lab])
        rng.shuffle(members)
        test_idx.extend(members[: counts[lab]])
    test_set = set(test_idx)
    train_idx = [i for i in range(total) if i not in test_set]
    test_idx = sorted(test_idx)
    return SplitPair(
        train=caseset.subset(train_idx),
        test=caseset.subset(test_idx),
        seed=seed,
        test_fraction=test_fraction,
    )


@dataclass(frozen=True)
class SynthClass:
    judgment_name: str
    keywords: tuple
    evidence_choices: tuple


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a keyword-separable synthetic corpus."""

    case_type: str
    per_class: int
    classes: tuple
    filler: tuple

    def __post_init__(self):
        if self.per_class < 1:
            raise DataError("per_class must be >= 1")
        seen: set[str] = set()
        for cls in self.classes:
            if not cls.keywords:
                raise DataError(f"class {cls.judgment_name!r} has an empty keyword lexicon")
            overlap = seen & set(cls.keywords)
            if overlap:
                raise DataError(f"keyword lexicons overlap on {sorted(overlap)}")
            seen |= set(cls.keywords)
        filler_overlap = seen & set(self.filler)
        if filler_overlap:
            raise DataError(f"filler vocabulary overlaps keywords on {sorted(filler_overlap)}")


def default_synth_spec(case_type: str, per_class: int = 25) -> SynthSpec:
    if case_type not in CASE_TYPES:
        raise DataError(f"unknown case_type {case_type!r}")
    text = resources.files("aljp").joinpath(f"data/synth_{case_type}.json").read_text("utf-8")
    raw = json.loads(text)
    classes = tuple(
        SynthClass(
            judgment_name=c["judgment"],
            keywords=tuple(c["keywords"]),
            evidence_choices=tuple(c["evidence_choices"]),
        )
        for c in raw["classes"]
    )
    return SynthSpec(
        case_type=raw["case_type"],
        per_class=per_class,
        classes=classes,
        filler=tuple(raw["filler"]),
    )


_HARAKAT = ("َ", "ُ", "ِ", "ّ", "ْ")


def _decoy_date(rng: RngState) -> str:
    day = 1 + rng.randint(28)
    month = 1 + rng.randint(12)
    style = rng.randint(4)
    if style == 0:
        year = 1400 + rng.randint(46)
        return f"{year}/{month:02d}/{day:02d}"
    if style == 1:
        year = 1990 + rng.randint(34)
        return f"{day:02d}-{month:02d}-{year}"
    if style == 2:
        year = 1990 + rng.randint(34)
        return f"{day}.{month}.{year}"
    year = 1400 + rng.randint(46)
    return f"بتاريخ {year}"


def _sprinkle_diacritics(word: str, rng: RngState) -> str:
    out = []
    for ch in word:
        out.append(ch)
        if rng.random() < 0.3:
            out.append(rng.choice(_HARAKAT))
    return "".join(out)


def _compose(parts: list[str], rng: RngState) -> str:
    rng.shuffle(parts)
    return " ".join(parts)


def generate_synthetic(spec: SynthSpec, seed: int, catalogs: dict | None = None) -> CaseSet:
    """Generate a balanced, deterministic, keyword-separable case set."""
    if catalogs is None:
        catalogs = load_catalogs()
    jcat = catalogs[("judgment", spec.case_type)]
    ecat = catalogs[("evidence", spec.case_type)]
    class_indices = [jcat.index_of(c.judgment_name) for c in spec.classes]
    rng = RngState(seed, stream=29)
    filler = list(spec.filler)
    cases: list[Case] = []
    counter = 0
    for cls, judgment_idx in zip(spec.classes, class_indices):
        for _ in range(spec.per_class):
            keyword = rng.choice(cls.keywords)
            claim_parts = [keyword] + [rng.choice(filler) for _ in range(8 + rng.randint(6))]
            claim_parts.append(_decoy_date(rng))
            claim = _compose(claim_parts, rng)
            answer_parts = [rng.choice(filler) for _ in range(6 + rng.randint(5))]
            if rng.random() < 0.5:
                answer_parts.append(_decoy_date(rng))
            answer = _compose(answer_parts, rng)
            pleading_parts = [keyword, rng.choice(cls.keywords)]
            pleading_parts += [rng.choice(filler) for _ in range(15 + rng.randint(8))]
            pleading_parts.append(_decoy_date(rng))
            pleading_parts.append(_sprinkle_diacritics(rng.choice(filler), rng))
            pleading = _compose(pleading_parts, rng)
            evidence_idx = rng.choice(cls.evidence_choices)
            if not 0 <= evidence_idx < len(ecat):
                raise DataError(
                    f"evidence choice {evidence_idx} out of range for "
                    f"{spec.case_type} evidence catalog"
                )
            cases.append(
                Case(
                    id=f"syn-{spec.case_type}-{counter:04d}",
                    case_type=spec.case_type,
                    claim_text=claim,
                    answer_text=answer,
                    pleading_text=pleading,
                    judgment_label=judgment_idx,
                    evidence_label=evidence_idx,
                )
            )
            counter += 1
    rng.shuffle(cases)
    return CaseSet(
        cases=cases,
        case_type=spec.case_type,
        judgment_catalog=jcat,
        evidence_catalog=ecat,
        provenance="synthetic",
    )


def synthetic_embeddings(spec: SynthSpec, dim: int, seed: int) -> EmbeddingStore:
    """Word vectors aligned with the synthetic classes.

    Keyword tokens of class k point strongly along axis k (mod dim); filler
    and the claim/answer separator get small seeded noise. Stands in for a
    pretrained store so averaged document vectors stay class-informative.
    """
    if dim < 1:
        raise DataError("embedding dim must be >= 1")
    rng = RngState(seed, stream=31)
    vectors: dict[str, np.ndarray] = {}
    for k, cls in enumerate(spec.classes):
        for token in cls.keywords:
            vec = rng.uniform_array((dim,), -0.05, 0.05)
            vec[k % dim] += 3.0
            vectors[token] = vec
    for token in spec.filler + (SEPARATOR_TOKEN,):
        vectors[token] = rng.uniform_array((dim,), -0.1, 0.1)
    return EmbeddingStore(dim=dim, vectors=vectors)
