"""Loaders for the bundled lexicon data files.

Each lexicon ships as a plain-text file under ``bindery/data`` (one entry
per line, ``#`` comments, tab-separated columns where a value is attached).
An alternative directory can be supplied to override any of them; files
missing from the override directory fall back to the bundled copy.
"""

from functools import lru_cache
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


def _lexicon_path(filename, lexicon_dir=""):
    if lexicon_dir:
        candidate = Path(lexicon_dir) / filename
        if candidate.exists():
            return candidate
    return DATA_DIR / filename


def _read_lines(path):
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append(line)
    return out


@lru_cache(maxsize=None)
def abbreviations(lexicon_dir=""):
    """Tokens kept whole by the tokenizer, e.g. 'Mr.'."""
    return frozenset(_read_lines(_lexicon_path("abbreviations.txt", lexicon_dir)))


@lru_cache(maxsize=None)
def speech_verbs(lexicon_dir=""):
    return frozenset(_read_lines(_lexicon_path("speech_verbs.txt", lexicon_dir)))


@lru_cache(maxsize=None)
def lemma_exceptions(lexicon_dir=""):
    table = {}
    for line in _read_lines(_lexicon_path("lemma_exceptions.txt", lexicon_dir)):
        form, _, lemma = line.partition("\t")
        table[form.strip().lower()] = lemma.strip().lower()
    return table


@lru_cache(maxsize=None)
def honorifics(lexicon_dir=""):
    """Map of lowercase honorific (period stripped) to gender."""
    table = {}
    for line in _read_lines(_lexicon_path("honorifics.tsv", lexicon_dir)):
        form, _, gender = line.partition("\t")
        table[form.strip().lower()] = gender.strip()
    return table


@lru_cache(maxsize=None)
def first_name_genders(lexicon_dir=""):
    table = {}
    for line in _read_lines(_lexicon_path("first_names.tsv", lexicon_dir)):
        name, _, gender = line.partition("\t")
        table[name.strip().lower()] = gender.strip()
    return table


@lru_cache(maxsize=None)
def section_keywords(lexicon_dir=""):
    """Map of lowercase header keyword to section kind."""
    table = {}
    for line in _read_lines(_lexicon_path("section_keywords.txt", lexicon_dir)):
        keyword, _, kind = line.partition("\t")
        table[keyword.strip().lower()] = kind.strip()
    return table


@lru_cache(maxsize=None)
def dale_familiar_words(lexicon_dir=""):
    return frozenset(_read_lines(_lexicon_path("dale_familiar_words.txt", lexicon_dir)))


@lru_cache(maxsize=None)
def spache_familiar_words(lexicon_dir=""):
    return frozenset(_read_lines(_lexicon_path("spache_familiar_words.txt", lexicon_dir)))


@lru_cache(maxsize=None)
def stopwords(lexicon_dir=""):
    return frozenset(_read_lines(_lexicon_path("stopwords.txt", lexicon_dir)))
