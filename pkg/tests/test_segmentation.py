import itertools
import logging
import random

from bindery.segmentation import (detect_headers, enforce_numbering_consistency,
                                  parse_header_number, parse_roman, segment)
from bindery.xml_model import Header


# -- independent oracles -------------------------------------------------------

_ROMAN_TABLE = [(1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"),
                (90, "XC"), (50, "L"), (40, "XL"), (10, "X"), (9, "IX"),
                (5, "V"), (4, "IV"), (1, "I")]


def roman_oracle(n):
    out = ""
    for value, digit in _ROMAN_TABLE:
        while n >= value:
            out += digit
            n -= value
    return out


_ONES = "one two three four five six seven eight nine".split()
_TEEN = ("ten eleven twelve thirteen fourteen fifteen sixteen seventeen "
         "eighteen nineteen").split()
_TENS = "twenty thirty forty fifty sixty seventy eighty ninety".split()


def spelled_oracle(n):
    if n <= 9:
        return _ONES[n - 1]
    if n <= 19:
        return _TEEN[n - 10]
    if n == 100:
        return "hundred"
    tens, ones = divmod(n, 10)
    word = _TENS[tens - 2]
    return f"{word}-{_ONES[ones - 1]}" if ones else word


def best_run_oracle(numbers, gap=1):
    """Brute force over all subsequences: longest chain from 1, steps 1..1+gap."""
    n = len(numbers)
    best = ()
    for size in range(n, 0, -1):
        found = None
        for combo in itertools.combinations(range(n), size):
            values = [numbers[i] for i in combo]
            if values[0] != 1:
                continue
            if all(1 <= b - a <= 1 + gap for a, b in zip(values, values[1:])):
                found = combo
                break  # combinations are lexicographic: earliest positions first
        if found:
            best = found
            break
    return list(best)


# -- parse_header_number ----------------------------------------------------------


def test_roman_parse_matches_oracle_everywhere():
    for n in range(1, 4000):
        assert parse_roman(roman_oracle(n)) == n


def test_non_strict_roman_rejected():
    for bad in ("IIII", "VV", "IC", "XM", "IL", "VX"):
        assert parse_roman(bad) is None
        assert parse_header_number(bad) is None


def test_spelled_numbers_match_oracle():
    for n in range(1, 101):
        assert parse_header_number(spelled_oracle(n)) == n
        assert parse_header_number(spelled_oracle(n).upper()) == n


def test_parse_header_number_examples():
    assert parse_header_number("XIV") == 14
    assert parse_header_number("TWENTY-THREE") == 23
    assert parse_header_number("42") == 42
    assert parse_header_number("the First") == 1
    assert parse_header_number("0") is None
    assert parse_header_number("4000") is None
    assert parse_header_number("gibberish") is None


# -- detect_headers ----------------------------------------------------------------


def lines_of(text):
    return text.split("\n")


def test_chapter_keyword_header():
    found = detect_headers(lines_of("\nCHAPTER I.\n\nIt begins."))
    assert len(found) == 1
    index, header = found[0]
    assert (header.kind, header.number) == ("chapter", 1)


def test_prose_line_is_not_header():
    found = detect_headers(lines_of("\nIt was the best of times\n\nmore"))
    assert found == []


def test_bare_roman_line():
    found = detect_headers(lines_of("\nXLII\n\nprose"))
    assert len(found) == 1
    assert found[0][1].kind == "other"
    assert found[0][1].number == 42


def test_header_requires_blank_surround():
    text = "prose before\nCHAPTER I.\n\nbody"
    assert detect_headers(lines_of(text)) == []


def test_header_length_limit():
    long_line = "CHAPTER I. " + "x" * 60
    assert detect_headers(["", long_line, ""]) == []


def test_keyword_with_title_and_separator():
    found = detect_headers(lines_of("\nChapter 7: The Weir\n\nbody"))
    assert found[0][1].kind == "chapter"
    assert found[0][1].number == 7


def test_spelled_chapter_header():
    found = detect_headers(lines_of("\nCHAPTER ONE\n\nbody"))
    assert found[0][1].number == 1
    found = detect_headers(lines_of("\nChapter the First\n\nbody"))
    assert found[0][1].number == 1


def test_interleaved_headers_all_detected():
    # Brute-force grep-style oracle: every CHAPTER k line, blank-surrounded.
    lines = []
    for k in range(1, 21):
        lines += [f"CHAPTER {k}", "", f"Prose of chapter {k} runs here.", ""]
    found = detect_headers(lines)
    oracle = [i for i, line in enumerate(lines) if line.startswith("CHAPTER")]
    assert [i for i, _ in found] == oracle


# -- numbering consistency ------------------------------------------------------------


def _candidates(numbers, kind="chapter"):
    return [(i * 2, Header(kind=kind, number=n, text=f"{kind} {n}"))
            for i, n in enumerate(numbers)]


def test_consecutive_numbers_all_accepted():
    accepted = enforce_numbering_consistency(_candidates([1, 2, 3, 4]))
    assert [h.number for _, h in accepted] == [1, 2, 3, 4]


def test_single_gap_tolerated_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        accepted = enforce_numbering_consistency(_candidates([1, 2, 4]))
    assert [h.number for _, h in accepted] == [1, 2, 4]
    assert any("gap" in r.message for r in caplog.records)


def test_stray_prefix_rejected():
    accepted = enforce_numbering_consistency(_candidates([7, 1, 2, 3]))
    assert [h.number for _, h in accepted] == [1, 2, 3]


def test_large_gap_splits_run():
    accepted = enforce_numbering_consistency(_candidates([1, 2, 9, 10]))
    assert [h.number for _, h in accepted] == [1, 2]


def test_unnumbered_between_accepted_kept_as_other():
    candidates = [
        (0, Header("chapter", 1, "CHAPTER I.")),
        (4, Header("chapter", 2, "CHAPTER II.")),
        (8, Header("chapter", None, "CHAPTER THE LAST BUT ONE")),
        (12, Header("chapter", 3, "CHAPTER III.")),
    ]
    accepted = enforce_numbering_consistency(candidates)
    kinds = [(h.kind, h.number) for _, h in accepted]
    assert ("other", None) in kinds
    assert [n for _, n in kinds if n] == [1, 2, 3]


def test_numbering_matches_bruteforce_oracle():
    rnd = random.Random(99)
    for _ in range(120):
        numbers = [rnd.randint(1, 8) for _ in range(rnd.randint(1, 10))]
        accepted = enforce_numbering_consistency(_candidates(numbers))
        got = [h.number for _, h in accepted]
        expected = [numbers[i] for i in best_run_oracle(numbers)]
        assert got == expected, f"numbers={numbers}"


def test_accepted_numbers_strictly_increasing_per_kind():
    rnd = random.Random(5)
    for _ in range(60):
        numbers = [rnd.randint(1, 9) for _ in range(rnd.randint(1, 12))]
        accepted = enforce_numbering_consistency(_candidates(numbers))
        values = [h.number for _, h in accepted if h.number is not None]
        assert all(a < b for a, b in zip(values, values[1:]))


# -- segmentation partition ------------------------------------------------------------

BODY = """Opening words before any chapter, a short preamble.

CHAPTER I.

First chapter prose, line one.
Second line of the first chapter.

Another paragraph of chapter one.

CHAPTER II.

Second chapter prose."""


def test_segment_partitions_every_line():
    sections = segment(BODY)
    assert len(sections) == 3  # preamble + two chapters
    assert sections[0].header is None
    assert sections[1].header.number == 1
    assert sections[2].header.number == 2
    texts = []
    for section in sections:
        if section.header:
            texts.append(section.header.text)
        for paragraph in section.paragraphs:
            texts.append(paragraph.raw)
    rebuilt = "\n\n".join(texts)
    assert rebuilt == BODY


def test_segment_offsets_point_into_body():
    sections = segment(BODY)
    for section in sections:
        for paragraph in section.paragraphs:
            assert BODY[paragraph.offset:
                        paragraph.offset + len(paragraph.raw)] == paragraph.raw


def test_empty_body_yields_single_empty_section():
    sections = segment("")
    assert len(sections) == 1
    assert sections[0].paragraphs == []
