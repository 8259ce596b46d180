import pytest

from bindery.config import Config
from bindery.errors import MissingPhaseError
from bindery.ingest import read_gutenberg
from bindery.pipeline import (annotate_book, body_text_of, build_book_payload,
                              canonicalize_body, ingest_to_book, to_raw_stage)
from conftest import BOOKS


@pytest.fixture(scope="module")
def annotated_fixtures():
    config = Config()
    books = {}
    for path in sorted(BOOKS.glob("pg*.txt")):
        book = ingest_to_book(read_gutenberg(path), config)
        raw_body = body_text_of(book)
        annotate_book(book, config)
        books[path.stem] = (book, raw_body)
    return books


def test_canonicalize_body_normalizes_whitespace():
    text = "first line  \n   second\n\n\n\nnext block\n"
    assert canonicalize_body(text) == "first line\nsecond\n\nnext block"


def test_offset_integrity_against_canonical_body(annotated_fixtures):
    # Joining token texts with the recorded offsets reproduces the body:
    # every non-whitespace character matches, gaps stay whitespace.
    for book_id, (book, raw_body) in annotated_fixtures.items():
        rebuilt = body_text_of(book)
        assert len(rebuilt) == len(raw_body), book_id
        for i, ch in enumerate(raw_body):
            if ch.isspace():
                assert rebuilt[i].isspace(), (book_id, i)
            else:
                assert rebuilt[i] == ch, (book_id, i)


def test_token_indices_and_offsets_increase(annotated_fixtures):
    for book_id, (book, _) in annotated_fixtures.items():
        last_index = -1
        last_end = -1
        for token in book.iter_tokens():
            assert token.index == last_index + 1, book_id
            assert token.offset >= last_end, book_id
            last_index = token.index
            last_end = token.offset + len(token.text)


def test_phase_stamps_in_order(annotated_fixtures):
    for book, _ in annotated_fixtures.values():
        assert book.phases == ["ingest", "segment", "linguistic", "characters"]


def test_every_emitted_character_has_three_mentions(annotated_fixtures):
    for book, _ in annotated_fixtures.values():
        for record in book.characters:
            assert record.count >= 3
            assert sum(record.alias_counts.values()) == record.count


def test_to_raw_stage_then_reannotate_is_identical(annotated_fixtures, config):
    from bindery import xml_model
    for book_id, (book, _) in annotated_fixtures.items():
        first = xml_model.serialize(book)
        again = xml_model.parse(first)
        to_raw_stage(again)
        annotate_book(again, config)
        assert xml_model.serialize(again) == first, book_id


def test_analytics_requires_characters_phase(config):
    book = ingest_to_book(read_gutenberg(BOOKS / "pg730.txt"), config)
    with pytest.raises(MissingPhaseError) as err:
        build_book_payload(book, config)
    assert "characters" in str(err.value)
