"""Arabic text normalization pipeline.

Fixed stage order: diacritic stripping, date removal, tokenization,
stop-word filtering. Optional orthographic folding (alef variants) and a
light stemmer sit behind flags and default off.

Date removal applies a documented pattern list, iterated to a fixed point:

* P1 - full numeric dates ``d sep m sep y`` or ``y sep m sep d`` with
  separators ``/``, ``-`` or ``.``, optionally followed by a calendar
  marker (``هـ``/``ه``/``م``);
* P2 - a plausible 4-digit year (Hijri 13xx-14xx, Gregorian 19xx-20xx)
  followed by a calendar marker;
* P3 - the same plausible years directly after a date context word
  (e.g. ``بتاريخ``, ``عام``, ``سنة``); the context word is kept.

Arabic-Indic digits count as digits in all three patterns.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import DataError

__all__ = [
    "DEFAULT_DIACRITICS",
    "PreprocessConfig",
    "default_config",
    "load_stoplist",
    "strip_diacritics",
    "fold_alef",
    "remove_dates",
    "tokenize",
    "drop_stopwords",
    "light_stem",
    "preprocess",
]

# U+064B..U+065F (harakat), U+0670 superscript alef, U+0640 tatweel.
DEFAULT_DIACRITICS: frozenset[str] = frozenset(
    {chr(cp) for cp in range(0x064B, 0x0660)} | {"ٰ", "ـ"}
)

_NUM = "[0-9٠-٩]"
_SEP = r"[/\-.]"
_YEAR4 = (
    "(?:1[34][0-9]{2}|19[0-9]{2}|20[0-9]{2}"
    "|١[٣٤][٠-٩]{2}"
    "|١٩[٠-٩]{2}"
    "|٢٠[٠-٩]{2})"
)
_MARKER = "(?:هـ|ه|م)"  # هـ / ه / م
_CONTEXT_WORDS = (
    "بتاريخ",
    "التاريخ",
    "تاريخ",
    "الموافق",
    "لعام",
    "العام",
    "عام",
    "لسنة",
    "السنة",
    "سنة",
    "الجلسة",
    "جلسة",
    "مواليد",
    "المولودة",
    "المولود",
    "ولدت",
    "ولد",
)
_CONTEXT = "(?:" + "|".join(_CONTEXT_WORDS) + ")"

_P1 = re.compile(
    rf"(?<!\w)(?:{_NUM}{{1,2}}{_SEP}{_NUM}{{1,2}}{_SEP}{_NUM}{{2,4}}"
    rf"|{_NUM}{{4}}{_SEP}{_NUM}{{1,2}}{_SEP}{_NUM}{{1,2}})"
    rf"(?:\W*{_MARKER}(?!\w))?(?!\w)"
)
_P2 = re.compile(rf"(?<!\w){_YEAR4}\W*{_MARKER}(?!\w)")
_P3 = re.compile(rf"(?<!\w)({_CONTEXT})\W*{_YEAR4}(?!\w)")


def load_stoplist(path) -> frozenset[str]:
    """One token per line, UTF-8; blank lines ignored."""
    tokens = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        token = line.strip()
        if token:
            tokens.add(token)
    return frozenset(tokens)


def _packaged_stoplist() -> frozenset[str]:
    text = resources.files("aljp").joinpath("data/stopwords_ar.txt").read_text("utf-8")
    return frozenset(t for t in (line.strip() for line in text.splitlines()) if t)


@dataclass(frozen=True)
class PreprocessConfig:
    """Pipeline switches plus the stop list, normalized at construction."""

    stoplist: frozenset = field(default_factory=_packaged_stoplist)
    strip_diacritics: bool = True
    remove_dates: bool = True
    fold_alef: bool = False
    stem: bool = False
    diacritic_codepoints: frozenset = DEFAULT_DIACRITICS

    def __post_init__(self):
        if self.strip_diacritics and not self.diacritic_codepoints:
            raise DataError("strip_diacritics set but diacritic_codepoints empty")
        normalized = frozenset(self._normalize_token(t) for t in self.stoplist)
        object.__setattr__(self, "stoplist", normalized - {""})

    def _normalize_token(self, token: str) -> str:
        if self.strip_diacritics:
            token = strip_diacritics(token, self.diacritic_codepoints)
        if self.fold_alef:
            token = fold_alef(token)
        return token

    @classmethod
    def from_file(cls, path) -> "PreprocessConfig":
        """Read config keys stoplist_path / strip_diacritics / remove_dates / fold_alef / stem."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        stoplist = (
            load_stoplist(raw["stoplist_path"])
            if raw.get("stoplist_path")
            else _packaged_stoplist()
        )
        return cls(
            stoplist=stoplist,
            strip_diacritics=raw.get("strip_diacritics", True),
            remove_dates=raw.get("remove_dates", True),
            fold_alef=raw.get("fold_alef", False),
            stem=raw.get("stem", False),
        )

    def to_dict(self) -> dict:
        return {
            "stoplist": sorted(self.stoplist),
            "strip_diacritics": self.strip_diacritics,
            "remove_dates": self.remove_dates,
            "fold_alef": self.fold_alef,
            "stem": self.stem,
            "diacritic_codepoints": sorted(ord(c) for c in self.diacritic_codepoints),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PreprocessConfig":
        return cls(
            stoplist=frozenset(raw["stoplist"]),
            strip_diacritics=raw["strip_diacritics"],
            remove_dates=raw["remove_dates"],
            fold_alef=raw.get("fold_alef", False),
            stem=raw.get("stem", False),
            diacritic_codepoints=frozenset(chr(cp) for cp in raw["diacritic_codepoints"]),
        )


def default_config() -> PreprocessConfig:
    return PreprocessConfig()


def strip_diacritics(text: str, codepoints: frozenset = DEFAULT_DIACRITICS) -> str:
    """Drop every configured diacritic scalar; all other scalars kept in order."""
    return "".join(ch for ch in text if ch not in codepoints)


_ALEF_VARIANTS = str.maketrans({"أ": "ا", "إ": "ا", "آ": "ا", "ٱ": "ا"})


def fold_alef(text: str) -> str:
    """Map hamza/madda alef variants to bare alef (off by default)."""
    return text.translate(_ALEF_VARIANTS)


def remove_dates(text: str) -> str:
    """Remove date expressions per the module pattern list, then re-collapse whitespace.

    Patterns are applied until a fixed point so expressions uncovered by an
    earlier removal are caught too. Text without any match is returned
    verbatim.
    """
    current = text
    changed = False
    while True:
        step = _P1.sub(" ", current)
        step = _P2.sub(" ", step)
        step = _P3.sub(lambda m: m.group(1), step)
        if step == current:
            break
        current = step
        changed = True
    if not changed:
        return text
    return " ".join(current.split())


def _is_delimiter(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Split on whitespace and punctuation (Latin and Arabic alike).

    Emits no empty tokens; digits-only tokens are kept; order preserved.
    """
    tokens: list[str] = []
    buf: list[str] = []
    for ch in text:
        if _is_delimiter(ch):
            if buf:
                tokens.append("".join(buf))
                buf.clear()
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))
    return tokens


def drop_stopwords(tokens: list[str], stoplist) -> list[str]:
    return [t for t in tokens if t not in stoplist]


_STEM_PREFIXES = ("وال", "بال", "كال", "فال", "ال", "لل", "و")
_STEM_SUFFIXES = ("ها", "ان", "ات", "ون", "ين", "ية", "ه", "ة", "ي")


def light_stem(token: str) -> str:
    """Strip one common prefix and one common suffix, keeping stems >= 3 chars."""
    for pre in _STEM_PREFIXES:
        if token.startswith(pre) and len(token) - len(pre) >= 3:
            token = token[len(pre):]
            break
    for suf in _STEM_SUFFIXES:
        if token.endswith(suf) and len(token) - len(suf) >= 3:
            token = token[: -len(suf)]
            break
    return token


def preprocess(text: str, config: PreprocessConfig | None = None) -> list[str]:
    """Full pipeline: diacritics, dates, tokenize, stop words (+ optional stages)."""
    if config is None:
        config = default_config()
    if config.strip_diacritics:
        text = strip_diacritics(text, config.diacritic_codepoints)
    if config.fold_alef:
        text = fold_alef(text)
    if config.remove_dates:
        text = remove_dates(text)
    tokens = tokenize(text)
    tokens = drop_stopwords(tokens, config.stoplist)
    if config.stem:
        tokens = [light_stem(t) for t in tokens]
    return tokens
