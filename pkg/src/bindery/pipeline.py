"""Pipeline orchestration over an on-disk store.

Store layout: ``store/<book_id>/{book.xml, book.json, index.html}`` with
corpus-level artifacts under ``store/_corpus/``. Phase stamps inside each
book's XML enforce ordering and make re-runs incremental: a book whose
stamps are current is skipped unless forced, and files are only rewritten
when their bytes change.
"""

import json
import logging
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analytics_book, analytics_corpus, characters, dedup, ingest
from . import linguistic, report, segmentation
from . import xml_model
from .errors import AnalyticsError, BinderyError, MissingPhaseError, TooShortError
from .xml_model import AnnotatedBook, BookMeta, GENDERS

log = logging.getLogger(__name__)

CORPUS_DIR = "_corpus"
INDEX_FILE = "index.jsonl"
STATS_FILE = "stats.json"
LEMMAS_FILE = "lemmas.json"
VECTORS_FILE = "vectors.bin"
PROGRESS_FILE = "progress.jsonl"


# -- source discovery -----------------------------------------------------------


def discover_sources(in_dir):
    """Raw book sources under a directory.

    Plain ``.txt`` files are Gutenberg-style books; subdirectories holding
    zero-padded page files are page-wise books. Returns a sorted list of
    ``(book_id, path, kind)``.
    """
    in_dir = Path(in_dir)
    sources = []
    for entry in sorted(in_dir.iterdir()):
        if entry.is_file() and entry.suffix == ".txt":
            sources.append((_gutenberg_id(entry), entry,
                            ingest.SourceKind.GUTENBERG_TEXT))
        elif entry.is_dir() and any(p.suffix == ".txt" for p in entry.iterdir()):
            sources.append((f"ht{entry.name}", entry,
                            ingest.SourceKind.HATHI_PAGEWISE))
    return sources


def _gutenberg_id(path):
    match = re.fullmatch(r"(?:pg)?(\d+)", path.stem)
    return f"pg{match.group(1)}" if match else f"pg{path.stem}"


# -- per-book construction --------------------------------------------------------


def canonicalize_body(text):
    """Canonical body text: stripped lines, single blank line between blocks."""
    blocks = []
    block = []
    for line in text.split("\n"):
        line = line.strip()
        if line:
            block.append(line)
        elif block:
            blocks.append("\n".join(block))
            block = []
    if block:
        blocks.append("\n".join(block))
    return "\n\n".join(blocks)


def ingest_to_book(raw, config):
    """Build the ingest-stage annotated book from a raw source."""
    text = raw.text
    front = []
    back = []
    if raw.source_kind == ingest.SourceKind.GUTENBERG_TEXT:
        spans = ingest.annotate_gutenberg_boilerplate(raw)
        text, _ = ingest.strip_spans(text, spans)
        fb_source = ingest.RawBook(
            source_id=raw.source_id, source_kind=raw.source_kind,
            pages=[text], metadata=raw.metadata)
    else:
        fb_source = raw
    fb_spans = ingest.annotate_front_back_matter(
        fb_source,
        window_frac=config.front_window_frac,
        short_line_len=config.front_short_line_len,
        short_line_ratio=config.front_short_line_ratio)
    body, blocks = ingest.strip_spans(fb_source.text, fb_spans)
    front = [b.strip("\n") for b in blocks.get("front_matter", [])]
    back = [b.strip("\n") for b in blocks.get("back_matter", [])]

    canonical = canonicalize_body(body)
    paragraphs = []
    offset = 0
    for block in canonical.split("\n\n") if canonical else []:
        paragraphs.append(xml_model.Paragraph(raw=block, offset=offset))
        offset += len(block) + 2

    year = raw.metadata.get("year")
    book = AnnotatedBook(
        meta=BookMeta(
            title=raw.metadata.get("title"),
            author=raw.metadata.get("author"),
            year=int(year) if year is not None else None,
            source_id=raw.source_id,
            corpus=("gutenberg"
                    if raw.source_kind == ingest.SourceKind.GUTENBERG_TEXT
                    else "hathi"),
            subjects=[s.strip() for s in
                      str(raw.metadata.get("subjects", "")).split(";")
                      if s.strip()],
            encoding=raw.metadata.get("encoding"),
        ),
        front=front,
        back=back,
        body=[xml_model.Section(header=None, paragraphs=paragraphs)],
    )
    book.add_phase("ingest")
    return book


def body_text_of(book):
    """Canonical body text reconstructed from raw paragraphs or tokens.

    Token offsets index into the canonical body and header lines are their
    own blocks there, so the tokenized reconstruction preserves the exact
    length and word stream of the ingest-stage text (gap characters
    collapse to spaces, which fingerprint normalization ignores anyway).
    """
    raws = [p.raw for p in book.iter_paragraphs() if p.is_raw]
    if raws:
        return "\n\n".join(raws)
    pieces = []
    cursor = 0
    for section in book.body:
        if section.header is not None:
            offset = cursor + 2 if cursor > 0 else 0
            pieces.append((offset, section.header.text))
            cursor = offset + len(section.header.text)
        for paragraph in section.paragraphs:
            for sentence in paragraph.sentences:
                for token in sentence.tokens:
                    pieces.append((token.offset, token.text))
                    cursor = max(cursor, token.offset + len(token.text))
    if not pieces:
        return ""
    buffer = [" "] * cursor
    for offset, text in pieces:
        buffer[offset:offset + len(text)] = text
    return "".join(buffer)


def to_raw_stage(book):
    """Rebuild the ingest-stage body (raw blocks, one section) in place.

    Token offsets index the canonical body, so each paragraph's exact slice
    is recoverable (hard-wrap newlines collapse to spaces, preserving every
    offset); header lines become ordinary blocks again. Used by --force to
    redo segmentation onward.
    """
    paragraphs = []
    cursor = 0
    for section in book.body:
        if section.header is not None:
            offset = cursor + 2 if cursor > 0 else 0
            paragraphs.append(xml_model.Paragraph(raw=section.header.text,
                                                  offset=offset))
            cursor = offset + len(section.header.text)
        for paragraph in section.paragraphs:
            if paragraph.is_raw:
                paragraphs.append(paragraph)
                cursor = paragraph.offset + len(paragraph.raw)
                continue
            tokens = [t for s in paragraph.sentences for t in s.tokens]
            if not tokens:
                continue
            start = tokens[0].offset
            end = max(t.offset + len(t.text) for t in tokens)
            buffer = [" "] * (end - start)
            for token in tokens:
                rel = token.offset - start
                buffer[rel:rel + len(token.text)] = token.text
            paragraphs.append(xml_model.Paragraph(raw="".join(buffer),
                                                  offset=start))
            cursor = end
    book.body = [xml_model.Section(header=None, paragraphs=paragraphs)]
    book.characters = []
    book.phases = [p for p in book.phases if p == "ingest"]
    return book


def _require(book, phase, needed):
    if not book.has_phase(needed):
        raise MissingPhaseError(phase, needed)


def segment_book(book, config):
    _require(book, "segment", "ingest")
    if book.has_phase("segment"):
        return book
    body = "\n\n".join(p.raw for p in book.iter_paragraphs() if p.is_raw)
    book.body = segmentation.segment(
        body, max_len=config.header_max_len,
        gap_tolerance=config.numbering_gap_tolerance,
        lexicon_dir=config.lexicon_dir)
    book.add_phase("segment")
    return book


def linguistic_book(book, config):
    _require(book, "linguistic", "segment")
    if book.has_phase("linguistic"):
        return book
    index = 0
    for paragraph in book.iter_paragraphs():
        index = linguistic.annotate_paragraph(paragraph, index,
                                              lexicon_dir=config.lexicon_dir)
    book.add_phase("linguistic")
    return book


def characters_book(book, config):
    _require(book, "characters", "linguistic")
    if book.has_phase("characters"):
        return book
    for token in book.iter_tokens():
        token.character_id = None
        token.quote_id = None
    records, assignments = characters.identify_characters(
        book, min_mentions=config.min_mentions,
        pronoun_window=config.pronoun_sentence_window,
        lexicon_dir=config.lexicon_dir)
    paragraphs = list(book.iter_paragraphs())
    quotes = linguistic.extract_quotes(paragraphs)
    sentences = list(book.iter_sentences())
    linguistic.attribute_quotes(quotes, sentences, assignments,
                                lexicon_dir=config.lexicon_dir)
    characters.attach_pronoun_counts(book, records, quotes,
                                     mention_spans=assignments,
                                     window=config.pronoun_sentence_window)
    book.add_phase("characters")
    return book


def annotate_book(book, config):
    segment_book(book, config)
    linguistic_book(book, config)
    characters_book(book, config)
    return book


# -- analytics payloads -------------------------------------------------------------


def build_book_payload(book, config):
    """The per-book analytics document (corpus-relative fields left null)."""
    _require(book, "analytics", "characters")
    protagonist, ratio = characters.protagonist_stats(book.characters)
    try:
        readability = analytics_book.readability_suite(
            book, lexicon_dir=config.lexicon_dir)
    except AnalyticsError:
        readability = None
    try:
        pos = analytics_book.pos_distribution(book)
    except AnalyticsError:
        pos = None
    timeline = characters.build_occurrence_timeline(
        book, top_k=config.timeline_top_k)
    network = characters.build_interaction_network(
        book.characters, window=config.interaction_window,
        min_co=config.interaction_min_co)
    paragraphs = list(book.iter_paragraphs())
    sentences = list(book.iter_sentences())
    return {
        "schema": "bindery.book/1",
        "id": book.meta.source_id,
        "meta": {
            "title": book.meta.title,
            "author": book.meta.author,
            "year": book.meta.year,
            "corpus": book.meta.corpus,
            "subjects": list(book.meta.subjects),
        },
        "phases": list(book.phases) + (
            [] if book.has_phase("analytics") else ["analytics"]),
        "counts": {
            "sections": len(book.body),
            "paragraphs": len(paragraphs),
            "sentences": len(sentences),
            "tokens": book.token_count(),
        },
        "characters": [{
            "id": r.id, "name": r.canonical_name, "gender": r.gender,
            "count": r.count, "gcc": r.gcc, "fpcc": r.fpcc, "spcc": r.spcc,
            "aliases": dict(sorted(r.alias_counts.items())),
        } for r in book.characters],
        "protagonist": ({"id": protagonist.id, "name": protagonist.canonical_name,
                         "gender": protagonist.gender}
                        if protagonist is not None else None),
        "top2_ratio": ratio,
        "readability": readability,
        "pos": pos,
        "timeline": timeline,
        "network": network,
        "vocabulary": None,
        "similar": None,
        "placement": None,
    }


def build_corpus_stats(payloads, lemma_totals, config):
    """Corpus analytics document over the per-book payloads."""
    books = []
    char_count_lists = []
    ratios = []
    years = []
    pos_rows = []
    gender_pcts = {"male": [], "female": []}
    for payload in payloads:
        books.append({
            "id": payload["id"],
            "title": payload["meta"]["title"],
            "author": payload["meta"]["author"],
            "year": payload["meta"]["year"],
            "corpus": payload["meta"]["corpus"],
            "subjects": payload["meta"]["subjects"],
            "protagonist_gender": (payload["protagonist"] or {}).get("gender"),
            "top2_ratio": payload["top2_ratio"],
        })
        char_count_lists.append([c["count"] for c in payload["characters"]])
        if payload["top2_ratio"] is not None:
            ratios.append((payload["id"], payload["top2_ratio"]))
        if payload["meta"]["year"] is not None and payload["protagonist"]:
            years.append((payload["meta"]["year"],
                          payload["protagonist"]["gender"]))
        if payload["pos"]:
            pos_rows.append({tag: payload["pos"][tag]["percent"]
                             for tag in payload["pos"]})
        males = sum(1 for c in payload["characters"] if c["gender"] == "male")
        females = sum(1 for c in payload["characters"] if c["gender"] == "female")
        if males + females > 0:
            gender_pcts["male"].append(100.0 * males / (males + females))
            gender_pcts["female"].append(100.0 * females / (males + females))

    ranks = config.rank_share_ranks
    try:
        observed = analytics_corpus.rank_share_curve(char_count_lists, ranks=ranks)
        benford, zipf = analytics_corpus.reference_distributions(ranks=ranks)
        qualifying = sum(1 for counts in char_count_lists
                         if len([c for c in counts if c > 0]) >= ranks)
        rank_share = {"observed": observed, "benford": benford, "zipf": zipf,
                      "books": qualifying}
    except AnalyticsError:
        rank_share = None

    top2 = analytics_corpus.top2_ratio_distribution(
        ratios, threshold=config.top2_outlier_threshold,
        bins=config.top2_histogram_bins)
    top2["threshold"] = config.top2_outlier_threshold

    try:
        gender_bins = analytics_corpus.gender_over_time(
            years, bins=config.gender_time_bins)
    except AnalyticsError:
        gender_bins = None

    try:
        correlations = analytics_corpus.pos_correlations(pos_rows)
    except AnalyticsError:
        correlations = None

    pos_distributions = {}
    for row in pos_rows:
        for tag, pct in row.items():
            pos_distributions.setdefault(tag, []).append(pct)

    return {
        "schema": "bindery.corpus/1",
        "books": books,
        "rank_share": rank_share,
        "top2": top2,
        "gender_over_time": gender_bins,
        "pos_correlations": correlations,
        "pos_distributions": pos_distributions,
        "gender_pct_population": gender_pcts,
    }


def enrich_book_payload(payload, book, stats, lemma_model, vectors, config):
    """Fill corpus-relative sections: vocabulary, similar books, placement."""
    if lemma_model and lemma_model.get("total", 0) > 0:
        counts = analytics_book.lemma_counts(book)
        try:
            vocab = analytics_book.representative_vocabulary(
                counts, Counter(lemma_model["common"]),
                top_common=config.vocab_top_common,
                list_len=config.vocab_list_len)
            payload["vocabulary"] = {
                "most": [[w, r] for w, r in vocab.most],
                "least": [[w, r] for w, r in vocab.least],
                "missing": [[w, c] for w, c in vocab.missing],
            }
        except AnalyticsError:
            payload["vocabulary"] = None
    if vectors is not None and payload["id"] in vectors.ids:
        corpus_of = {b["id"]: (b["corpus"] or "") for b in stats["books"]}
        grouped = analytics_book.most_similar(
            payload["id"], vectors, k=config.similar_top_k,
            corpus_of=corpus_of)
        payload["similar"] = {
            label: [[other, sim] for other, sim in entries]
            for label, entries in grouped.items()}

    placement = {}
    if payload["pos"] and stats.get("pos_distributions"):
        percentiles = {}
        means = {}
        for tag, values in sorted(stats["pos_distributions"].items()):
            if values and tag in payload["pos"]:
                percentiles[tag] = analytics_corpus.percentile(
                    payload["pos"][tag]["percent"], values)
                means[tag] = sum(values) / len(values)
        placement["pos_percentiles"] = percentiles
        placement["pos_mean"] = means
    males = sum(1 for c in payload["characters"] if c["gender"] == "male")
    females = sum(1 for c in payload["characters"] if c["gender"] == "female")
    population = stats.get("gender_pct_population", {}).get("male", [])
    if males + females > 0:
        pct_male = 100.0 * males / (males + females)
        placement["gender_pct"] = {
            "male": pct_male,
            "female": 100.0 - pct_male,
            "percentile_male": (analytics_corpus.percentile(pct_male, population)
                                if population else None),
        }
    payload["placement"] = placement or None
    return payload


# -- store-level runners ---------------------------------------------------------


class PhaseResult:
    def __init__(self, book_id, ok, error=None):
        self.book_id = book_id
        self.ok = ok
        self.error = error


def _book_dir(store, book_id):
    return Path(store) / book_id


def _xml_path(store, book_id):
    return _book_dir(store, book_id) / "book.xml"


def _corpus_path(store, name):
    return Path(store) / CORPUS_DIR / name


def store_book_ids(store):
    store = Path(store)
    if not store.exists():
        return []
    return sorted(p.parent.name for p in store.glob("*/book.xml"))


def kept_book_ids(store):
    """Book ids that survived dedup (all books when dedup has not run)."""
    index_path = _corpus_path(store, INDEX_FILE)
    ids = store_book_ids(store)
    if not index_path.exists():
        return ids
    index = dedup.CorpusIndex.load(index_path)
    duplicates = {e.book_id for e in index.entries if e.is_duplicate}
    return [book_id for book_id in ids if book_id not in duplicates]


def run_ingest(in_dir, store, config, force=False):
    results = []
    for book_id, path, kind in discover_sources(in_dir):
        xml_path = _xml_path(store, book_id)
        try:
            if xml_path.exists() and not force:
                existing = xml_model.load(xml_path)
                if existing.has_phase("ingest"):
                    results.append(PhaseResult(book_id, True))
                    continue
            if kind == ingest.SourceKind.GUTENBERG_TEXT:
                raw = ingest.read_gutenberg(path)
            else:
                raw = ingest.read_hathi_pagewise(
                    path, page_separator=config.page_separator)
            raw.source_id = book_id
            book = ingest_to_book(raw, config)
            report.write_if_changed(xml_path, xml_model.serialize(book))
            results.append(PhaseResult(book_id, True))
        except BinderyError as exc:
            log.error("%s: ingest failed: %s", book_id, exc)
            results.append(PhaseResult(book_id, False, str(exc)))
    return results


def run_dedup(store, config):
    index = dedup.CorpusIndex()
    results = []
    for book_id in store_book_ids(store):
        try:
            book = xml_model.load(_xml_path(store, book_id))
            body = body_text_of(book)
            try:
                fp = dedup.fingerprint(
                    body, title=book.meta.title or "",
                    author=book.meta.author or "",
                    num_hashes=config.minhash_hashes,
                    shingle_size=config.shingle_size,
                    seed=config.seed)
            except TooShortError:
                fp = None
            index.entries.append(dedup.CorpusEntry(
                book_id=book_id,
                title=book.meta.title or "",
                author=book.meta.author or "",
                year=book.meta.year,
                corpus=book.meta.corpus or "",
                text_length=len(body),
                fingerprint=fp))
            results.append(PhaseResult(book_id, True))
        except BinderyError as exc:
            log.error("%s: dedup failed: %s", book_id, exc)
            results.append(PhaseResult(book_id, False, str(exc)))
    dedup.dedup_corpus(index,
                       title_author_match=config.dedup_title_author,
                       content_threshold=config.dedup_content_threshold)
    index_path = _corpus_path(store, INDEX_FILE)
    index_path.parent.mkdir(parents=True, exist_ok=True)
    index.save(index_path)
    removed = [e for e in index.entries if e.is_duplicate]
    if removed:
        log.info("dedup: %d duplicate(s): %s", len(removed),
                 ", ".join(f"{e.book_id}->{e.representative_of}" for e in removed))
    return results


def _annotate_one(args):
    store, book_id, config, force = args
    try:
        book = xml_model.load(_xml_path(store, book_id))
        if force and book.has_phase("segment"):
            to_raw_stage(book)
        if not book.has_phase("characters"):
            annotate_book(book, config)
            report.write_if_changed(_xml_path(store, book_id),
                                    xml_model.serialize(book))
        return PhaseResult(book_id, True)
    except BinderyError as exc:
        log.error("%s: annotate failed: %s", book_id, exc)
        return PhaseResult(book_id, False, str(exc))


def _analyze_one(args):
    store, book_id, config, force = args
    try:
        book = xml_model.load(_xml_path(store, book_id))
        if book.has_phase("analytics") and not force:
            return PhaseResult(book_id, True)
        payload = build_book_payload(book, config)
        report.dump_json(payload, _book_dir(store, book_id) / "book.json")
        book.add_phase("analytics")
        report.write_if_changed(_xml_path(store, book_id),
                                xml_model.serialize(book))
        return PhaseResult(book_id, True)
    except BinderyError as exc:
        log.error("%s: analyze failed: %s", book_id, exc)
        return PhaseResult(book_id, False, str(exc))


def _pool_map(worker, args_list, jobs):
    if jobs <= 1 or len(args_list) <= 1:
        return [worker(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, args_list))


def run_annotate(store, config, force=False):
    args = [(store, book_id, config, force) for book_id in kept_book_ids(store)]
    return _pool_map(_annotate_one, args, config.jobs)


def run_analyze(store, config, force=False):
    args = [(store, book_id, config, force) for book_id in kept_book_ids(store)]
    return _pool_map(_analyze_one, args, config.jobs)


def run_corpus_stats(store, config, force=False):
    del force  # corpus stats are cheap; always recomputed
    payloads = []
    lemma_counter = Counter()
    streams = {}
    results = []
    for book_id in kept_book_ids(store):
        try:
            json_path = _book_dir(store, book_id) / "book.json"
            if not json_path.exists():
                raise MissingPhaseError("corpus-stats", "analytics")
            book = xml_model.load(_xml_path(store, book_id))
            _require(book, "corpus-stats", "analytics")
            payloads.append(json.loads(json_path.read_text(encoding="utf-8")))
            lemma_counter.update(analytics_book.lemma_counts(book))
            streams[book_id] = analytics_book.lemma_stream(
                book, lexicon_dir=config.lexicon_dir)
            results.append(PhaseResult(book_id, True))
        except BinderyError as exc:
            log.error("%s: corpus-stats failed: %s", book_id, exc)
            results.append(PhaseResult(book_id, False, str(exc)))
    if not payloads:
        return results

    stats = build_corpus_stats(payloads, lemma_counter, config)
    corpus_dir = _corpus_path(store, "")
    corpus_dir.mkdir(parents=True, exist_ok=True)
    report.dump_json(stats, _corpus_path(store, STATS_FILE))

    common = sorted(lemma_counter,
                    key=lambda w: (-lemma_counter[w], w))[:config.vocab_top_common]
    lemma_model = {
        "total": sum(lemma_counter.values()),
        "common": {w: lemma_counter[w] for w in common},
    }
    report.dump_json(lemma_model, _corpus_path(store, LEMMAS_FILE))

    try:
        vectors = analytics_book.train_embeddings(
            streams, dim=config.embed_dim, window=config.embed_window,
            epochs=config.embed_epochs, min_count=config.embed_min_count,
            vocab_max=config.embed_vocab_max, negatives=config.embed_negatives,
            learning_rate=config.embed_learning_rate, seed=config.seed)
        vectors.save(_corpus_path(store, VECTORS_FILE))
    except AnalyticsError as exc:
        log.warning("embedding training skipped: %s", exc)
        vectors_path = _corpus_path(store, VECTORS_FILE)
        if vectors_path.exists():
            vectors_path.unlink()
    return results


def run_report(store, config, force=False):
    del force
    stats_path = _corpus_path(store, STATS_FILE)
    if not stats_path.exists():
        raise MissingPhaseError("report", "analytics")
    stats = json.loads(stats_path.read_text(encoding="utf-8"))
    lemmas_path = _corpus_path(store, LEMMAS_FILE)
    lemma_model = (json.loads(lemmas_path.read_text(encoding="utf-8"))
                   if lemmas_path.exists() else None)
    vectors_path = _corpus_path(store, VECTORS_FILE)
    vectors = (analytics_book.VectorStore.load(vectors_path)
               if vectors_path.exists() else None)

    results = []
    for book_id in kept_book_ids(store):
        try:
            json_path = _book_dir(store, book_id) / "book.json"
            if not json_path.exists():
                raise MissingPhaseError("report", "analytics")
            payload = json.loads(json_path.read_text(encoding="utf-8"))
            book = xml_model.load(_xml_path(store, book_id))
            enrich_book_payload(payload, book, stats, lemma_model, vectors,
                                config)
            report.emit_book_report(payload, _book_dir(store, book_id))
            results.append(PhaseResult(book_id, True))
        except BinderyError as exc:
            log.error("%s: report failed: %s", book_id, exc)
            results.append(PhaseResult(book_id, False, str(exc)))
    report.emit_corpus_report(stats, _corpus_path(store, ""))
    return results


def run_all(in_dir, store, config, force=False):
    results = run_ingest(in_dir, store, config, force=force)
    run_dedup(store, config)
    for runner in (run_annotate, run_analyze, run_corpus_stats, run_report):
        results.extend(runner(store, config, force=force))
    return results
