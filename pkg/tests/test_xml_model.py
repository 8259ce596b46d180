import random

import pytest

from bindery.errors import InvariantError, ParseError
from bindery.xml_model import (AnnotatedBook, BookMeta, CharacterRecord,
                               Header, Paragraph, Section, Sentence, Token,
                               parse, query, serialize, validate)
from generators import random_book


def minimal_book():
    return AnnotatedBook(
        meta=BookMeta(title="Minimal", source_id="pg1", corpus="gutenberg"),
        body=[Section(header=Header(kind="chapter", number=1, text="CHAPTER I."),
                      paragraphs=[Paragraph(sentences=[Sentence(tokens=[
                          Token(text="Hi", index=0, offset=0),
                          Token(text=".", index=1, offset=3, pos="PUNCT"),
                      ])])])],
        phases=["ingest", "segment"],
    )


GOLDEN_MINIMAL = """<?xml version="1.0" encoding="UTF-8"?>
<book>
  <meta>
    <title>Minimal</title>
    <source_id>pg1</source_id>
    <corpus>gutenberg</corpus>
    <phases>ingest segment</phases>
  </meta>
  <body>
    <section>
      <header kind="chapter" n="1">CHAPTER I.</header>
      <p>
        <s>
          <t i="0" o="0">Hi</t>
          <t i="1" o="3" pos="PUNCT">.</t>
        </s>
      </p>
    </section>
  </body>
</book>
"""


def test_minimal_book_matches_golden_file():
    assert serialize(minimal_book()) == GOLDEN_MINIMAL


def test_parse_serialize_roundtrip_minimal():
    book = minimal_book()
    assert parse(serialize(book)) == book


def test_serialize_parse_byte_identity():
    text = serialize(minimal_book())
    assert serialize(parse(text)) == text


def test_dangling_character_is_allowed():
    # A character no token references still serializes; only the reverse
    # direction (token -> missing character) is forbidden.
    book = minimal_book()
    book.characters = [CharacterRecord(
        id=0, canonical_name="Ghost", gender="unknown",
        alias_counts={"Ghost": 3}, mention_token_indices=[10, 20, 30])]
    assert parse(serialize(book)) == book


def test_token_referencing_missing_character_is_rejected():
    book = minimal_book()
    book.body[0].paragraphs[0].sentences[0].tokens[0].character_id = 7
    with pytest.raises(InvariantError):
        serialize(book)


def test_tokens_out_of_order_rejected():
    book = minimal_book()
    book.body[0].paragraphs[0].sentences[0].tokens[1].index = 0
    with pytest.raises(InvariantError):
        validate(book)


def test_parse_rejects_out_of_order_tokens():
    text = serialize(minimal_book()).replace('i="1"', 'i="0"')
    with pytest.raises(ParseError):
        parse(text)


def test_truncated_file_reports_position():
    text = serialize(minimal_book())
    with pytest.raises(ParseError) as err:
        parse(text[: len(text) // 2])
    assert "line" in str(err.value)


def test_unknown_element_reports_line():
    text = serialize(minimal_book()).replace("<body>", "<body>\n<bogus/>")
    with pytest.raises(ParseError) as err:
        parse(text)
    assert "bogus" in str(err.value)
    assert err.value.line is not None


def test_character_with_too_few_mentions_rejected():
    book = minimal_book()
    book.characters = [CharacterRecord(
        id=0, canonical_name="X", gender="male",
        alias_counts={"X": 2}, mention_token_indices=[1, 2])]
    with pytest.raises(InvariantError):
        serialize(book)


def test_raw_paragraph_roundtrips_exact_text():
    raw = "CONTENTS\n\nI. The House\nII. The Light  \n  indented"
    book = AnnotatedBook(
        meta=BookMeta(source_id="pg2"),
        body=[Section(paragraphs=[Paragraph(raw=raw, offset=17)])])
    assert parse(serialize(book)) == book


def test_escaping_of_special_characters():
    book = minimal_book()
    book.meta.title = 'A & B <novel> "quoted" — naïve'
    book.body[0].paragraphs[0].sentences[0].tokens[0].text = "<&>"
    book.body[0].paragraphs[0].sentences[0].tokens[0].lemma = 'l"e\nm'
    assert parse(serialize(book)) == book


def test_query_tokens_count():
    assert sum(1 for _ in query(minimal_book(), "tokens")) == 2


def test_query_mentions_of_unknown_id_errors():
    with pytest.raises(KeyError):
        query(minimal_book(), "mentions_of", 42)


def test_query_tokens_with_pos():
    tokens = list(query(minimal_book(), "tokens_with_pos", "PUNCT"))
    assert [t.text for t in tokens] == ["."]


def test_query_counts_are_consistent():
    book = random_book(seed=7)
    total = sum(len(s.tokens) for s in query(book, "sentences"))
    assert total == sum(1 for _ in query(book, "tokens"))


def test_random_books_roundtrip():
    rnd = random.Random(20240)
    for _ in range(100):
        book = random_book(rnd)
        text = serialize(book)
        again = parse(text)
        assert again == book
        assert serialize(again) == text
