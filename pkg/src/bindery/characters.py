"""Canonical character identification and character-level analytics.

Person mentions come from NER tags when an external import provided them,
otherwise from a capitalization-run baseline. Mentions gain prefixed
honorifics, receive three gender votes (honorific table, attributed
pronoun majority, first-name lexicon), and single-name mentions are folded
into the nearest compatible full name. Unique first/last/gender
combinations with more than two total mentions become characters.
"""

import logging
from bisect import bisect_left, bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from . import lexicons
from .linguistic import (AUXILIARIES, CONJUNCTIONS, DETERMINERS, INTERJECTIONS,
                         PREPOSITIONS, PRONOUNS)
from .xml_model import CharacterRecord

log = logging.getLogger(__name__)

MALE_PRONOUNS = frozenset(("he", "him", "his"))
FEMALE_PRONOUNS = frozenset(("she", "her", "hers"))
FIRST_PERSON_PRONOUNS = frozenset(("i", "me", "my", "mine", "myself"))
SECOND_PERSON_PRONOUNS = frozenset(("you", "your", "yours", "yourself",
                                    "yourselves"))

_NAME_STOPWORDS = (PRONOUNS | PREPOSITIONS | CONJUNCTIONS | DETERMINERS
                   | INTERJECTIONS | AUXILIARIES
                   | frozenset("""
not now then thus there here however perhaps yet soon still never ever again
once indeed meanwhile nevertheless presently suddenly tonight today tomorrow
yesterday
""".split()))


@dataclass
class MentionCandidate:
    start: int  # global token index, inclusive
    end: int    # global token index, inclusive
    surface: str
    honorific: str | None = None
    gender_honorific: str | None = None
    gender_pronoun: str | None = None
    gender_name: str | None = None
    name_parts: list = field(default_factory=list)

    @property
    def is_full_name(self):
        return len(self.name_parts) >= 2

    @property
    def first_name(self):
        return self.name_parts[0] if self.name_parts else None

    @property
    def last_name(self):
        return self.name_parts[-1] if len(self.name_parts) >= 2 else None


def _token_table(book):
    """Flat token list plus a parallel sentence-index list."""
    tokens = []
    sentence_index = []
    s = 0
    for sentence in book.iter_sentences():
        for token in sentence.tokens:
            tokens.append(token)
            sentence_index.append(s)
        s += 1
    return tokens, sentence_index


def _strip_possessive(text):
    if text.endswith(("'s", "’s")):
        return text[:-2]
    if text.endswith(("'", "’")):
        return text[:-1]
    return text


def _name_like(text):
    return (text[:1].isupper() and text[:1].isalpha()
            and any(ch.islower() for ch in text))


def detect_person_mentions(book, lexicon_dir=""):
    """Find person-mention candidates over the book's tokens.

    Tokens carrying ``ner=PERSON`` are used directly when present.
    Otherwise the baseline takes maximal runs of capitalized tokens:
    non-sentence-initial tokens qualify outright, sentence-initial tokens
    only when the same text appears capitalized mid-sentence elsewhere
    (runs right after an honorific are always in since the honorific
    occupies the initial position).
    """
    honorific_table = lexicons.honorifics(lexicon_dir)
    candidates = []
    if any(t.ner == "PERSON" for t in book.iter_tokens()):
        for sentence in book.iter_sentences():
            run = []
            for token in sentence.tokens:
                if token.ner == "PERSON":
                    run.append(token)
                else:
                    _close_run(candidates, run, honorific_table)
                    run = []
            _close_run(candidates, run, honorific_table)
        return candidates

    seen_non_initial = set()
    for sentence in book.iter_sentences():
        for position, token in enumerate(sentence.tokens):
            if position > 0 and _name_like(token.text):
                lower = _strip_possessive(token.text).lower()
                if lower not in _NAME_STOPWORDS and lower not in honorific_table:
                    seen_non_initial.add(_strip_possessive(token.text))

    for sentence in book.iter_sentences():
        run = []
        for position, token in enumerate(sentence.tokens):
            ok = _name_like(token.text)
            if ok:
                lower = _strip_possessive(token.text).lower()
                clean = lower.rstrip(".")
                if lower in _NAME_STOPWORDS or clean in honorific_table:
                    ok = False
                elif position == 0:
                    ok = _strip_possessive(token.text) in seen_non_initial
            if ok:
                run.append(token)
            else:
                _close_run(candidates, run, honorific_table)
                run = []
        _close_run(candidates, run, honorific_table)
    return candidates


def _close_run(candidates, run, honorific_table):
    if not run:
        return
    candidates.append(MentionCandidate(
        start=run[0].index, end=run[-1].index,
        surface=" ".join(t.text for t in run)))


def augment_honorifics(candidates, tokens, lexicon_dir=""):
    """Extend each candidate span left over an immediately preceding honorific."""
    honorific_table = lexicons.honorifics(lexicon_dir)
    by_index = {t.index: t for t in tokens}
    for candidate in candidates:
        head = by_index.get(candidate.start - 1)
        if head is not None:
            key = head.text.lower().rstrip(".")
            if key in honorific_table:
                candidate.start = head.index
                candidate.surface = f"{head.text} {candidate.surface}"
                candidate.honorific = key
                continue
        # NER spans may already include the honorific as their first token.
        first = candidate.surface.split(" ", 1)[0]
        key = first.lower().rstrip(".")
        if candidate.honorific is None and key in honorific_table:
            candidate.honorific = key
    return candidates


def _resolve_name_parts(candidates, lexicon_dir=""):
    honorific_table = lexicons.honorifics(lexicon_dir)
    names = lexicons.first_name_genders(lexicon_dir)
    for candidate in candidates:
        parts = []
        for word in candidate.surface.split(" "):
            if not parts and word.lower().rstrip(".") in honorific_table:
                continue
            parts.append(_strip_possessive(word))
        candidate.name_parts = parts
        if candidate.honorific is not None:
            vote = honorific_table[candidate.honorific]
            candidate.gender_honorific = vote if vote in ("male", "female") else None
        if parts:
            candidate.gender_name = names.get(parts[0].lower())


def _attach_pronoun_votes(candidates, tokens, sentence_index, window=2):
    """Vote each gendered pronoun toward its nearest preceding candidate."""
    order = sorted(range(len(candidates)), key=lambda i: candidates[i].end)
    ends = [candidates[i].end for i in order]
    index_to_sentence = {t.index: s for t, s in zip(tokens, sentence_index)}
    votes = defaultdict(Counter)
    for token, s in zip(tokens, sentence_index):
        lower = token.text.lower()
        if lower in MALE_PRONOUNS:
            gender = "male"
        elif lower in FEMALE_PRONOUNS:
            gender = "female"
        else:
            continue
        slot = bisect_left(ends, token.index) - 1
        if slot >= 0:
            candidate = candidates[order[slot]]
            c_sentence = index_to_sentence.get(candidate.end, 0)
            if s - c_sentence <= window:
                votes[order[slot]][gender] += 1
    for i, counter in votes.items():
        male, female = counter["male"], counter["female"]
        if male > female:
            candidates[i].gender_pronoun = "male"
        elif female > male:
            candidates[i].gender_pronoun = "female"


def infer_gender(candidate_or_cluster):
    """Resolve gender votes in preference order: honorific, pronoun, name.

    Accepts a single mention candidate or an iterable of them (a cluster);
    for clusters the honorific and name votes take the majority value and
    pronoun votes are pooled.
    """
    if isinstance(candidate_or_cluster, MentionCandidate):
        cluster = [candidate_or_cluster]
    else:
        cluster = list(candidate_or_cluster)
    for vote in ("gender_honorific", "gender_pronoun", "gender_name"):
        counter = Counter(getattr(c, vote) for c in cluster
                          if getattr(c, vote) is not None)
        if counter:
            top = counter.most_common()
            if len(top) == 1 or top[0][1] > top[1][1]:
                return top[0][0]
    return "unknown"


def cluster_mentions(candidates, min_mentions=3):
    """Group mentions into characters.

    Multi-token candidates define full names (first non-honorific token and
    final token). Each single-name candidate maps to the nearest occurrence
    of a gender-compatible full name sharing its first or last name; the
    tie between equidistant occurrences breaks toward the more frequent
    name form. Unique (first, last, gender) combinations with at least
    ``min_mentions`` total mentions become characters, ranked by mention
    count.

    Returns ``(records, assignments)`` where assignments is a list of
    ``(start, end, character_id)`` mention spans.
    """
    full_forms = defaultdict(list)   # (first, last) -> [candidate, ...]
    singles = []
    for candidate in candidates:
        if candidate.is_full_name:
            full_forms[(candidate.first_name, candidate.last_name)].append(candidate)
        elif candidate.name_parts:
            singles.append(candidate)

    form_gender = {form: infer_gender(members)
                   for form, members in full_forms.items()}

    occurrences_by_name = defaultdict(list)  # name part -> [(start, form), ...]
    for form, members in full_forms.items():
        for candidate in members:
            occurrences_by_name[form[0]].append((candidate.start, form))
            if form[1] != form[0]:
                occurrences_by_name[form[1]].append((candidate.start, form))
    for rows in occurrences_by_name.values():
        rows.sort()

    clusters = defaultdict(list)  # (first, last, gender) -> [candidate, ...]
    for form, members in full_forms.items():
        key = (form[0], form[1], form_gender[form])
        clusters[key].extend(members)

    leftovers = defaultdict(list)  # (name, honorific gender) -> [candidate, ...]
    for candidate in singles:
        form = _match_single(candidate, occurrences_by_name, full_forms,
                             form_gender)
        if form is not None:
            key = (form[0], form[1], form_gender[form])
            clusters[key].append(candidate)
        else:
            leftovers[(candidate.first_name, candidate.gender_honorific)].append(
                candidate)

    for (name, _), members in sorted(leftovers.items(),
                                     key=lambda kv: (kv[0][0], kv[0][1] or "")):
        gender = infer_gender(members)
        clusters[(name, None, gender)].extend(members)

    ranked = sorted(
        ((key, members) for key, members in clusters.items()
         if len(members) >= min_mentions),
        key=lambda kv: (-len(kv[1]), min(c.start for c in kv[1])))

    records = []
    assignments = []
    for char_id, (key, members) in enumerate(ranked):
        alias_counts = Counter(c.surface for c in members)
        canonical = sorted(alias_counts,
                           key=lambda a: (-alias_counts[a], -len(a.split()), a))[0]
        records.append(CharacterRecord(
            id=char_id,
            canonical_name=canonical,
            gender=key[2],
            alias_counts=dict(alias_counts),
            mention_token_indices=sorted(c.start for c in members),
        ))
        assignments.extend((c.start, c.end, char_id) for c in members)
    assignments.sort()
    return records, assignments


def _match_single(candidate, occurrences_by_name, full_forms, form_gender):
    """Nearest full-name occurrence for a single-name mention.

    Gender votes apply one source at a time in preference order: an
    honorific-compatible match wins outright, else a pronoun-compatible
    one, else a name-lexicon-compatible one. A voteless mention maps to
    the nearest name match regardless of gender.
    """
    rows = occurrences_by_name.get(candidate.first_name, ())
    if not rows:
        return None
    votes = [v for v in (candidate.gender_honorific, candidate.gender_pronoun,
                         candidate.gender_name) if v is not None]
    for vote in votes or [None]:
        best = None
        for start, form in rows:
            fg = form_gender[form]
            if vote is not None and fg not in (vote, "unknown"):
                continue
            distance = abs(start - candidate.start)
            key = (distance, -len(full_forms[form]), start)
            if best is None or key < best[0]:
                best = (key, form)
        if best is not None:
            return best[1]
    return None


def identify_characters(book, min_mentions=3, pronoun_window=2, lexicon_dir=""):
    """Run the full identification pipeline over an annotated book.

    Stamps mention tokens with their character id and attaches the records
    to the book, sorted by mention count.
    """
    tokens, sentence_index = _token_table(book)
    candidates = detect_person_mentions(book, lexicon_dir=lexicon_dir)
    augment_honorifics(candidates, tokens, lexicon_dir=lexicon_dir)
    _resolve_name_parts(candidates, lexicon_dir=lexicon_dir)
    _attach_pronoun_votes(candidates, tokens, sentence_index,
                          window=pronoun_window)
    records, assignments = cluster_mentions(candidates, min_mentions=min_mentions)

    by_index = {t.index: t for t in tokens}
    for start, end, char_id in assignments:
        for index in range(start, end + 1):
            token = by_index.get(index)
            if token is not None:
                token.character_id = char_id
    book.characters = records
    return records, assignments


def attach_pronoun_counts(book, records, quotes, mention_spans=None, window=2):
    """Fill gendered/first-person/second-person coreference counts.

    gcc counts gendered third-person pronouns whose nearest preceding
    gender-compatible mention (within ``window`` sentences) belongs to the
    character; fpcc counts first-person pronouns inside quotes the
    character speaks; spcc counts second-person pronouns inside quotes
    addressed to the character (the other character mentioned in the
    quote's narration sentence).
    """
    tokens, sentence_index = _token_table(book)
    if mention_spans is None:
        mention_spans = _spans_from_stamps(tokens)
    by_id = {record.id: record for record in records}
    index_to_sentence = {t.index: s for t, s in zip(tokens, sentence_index)}

    spans_sorted = sorted(mention_spans, key=lambda span: span[1])
    span_ends = [span[1] for span in spans_sorted]
    speaker_of = {q.id: q.speaker_id for q in quotes}

    for token, s in zip(tokens, sentence_index):
        lower = token.text.lower()
        if lower in MALE_PRONOUNS or lower in FEMALE_PRONOUNS:
            gender = "male" if lower in MALE_PRONOUNS else "female"
            slot = bisect_left(span_ends, token.index) - 1
            while slot >= 0:
                start, end, char_id = spans_sorted[slot]
                c_sentence = index_to_sentence.get(end, 0)
                if s - c_sentence > window:
                    break
                record = by_id.get(char_id)
                if record is not None and record.gender in (gender, "unknown"):
                    record.gcc += 1
                    break
                slot -= 1
        elif lower in FIRST_PERSON_PRONOUNS and token.quote_id is not None:
            speaker = speaker_of.get(token.quote_id)
            if speaker is not None and speaker in by_id:
                by_id[speaker].fpcc += 1
        elif lower in SECOND_PERSON_PRONOUNS and token.quote_id is not None:
            addressee = _addressee(token.quote_id, quotes, mention_spans,
                                   index_to_sentence, speaker_of)
            if addressee is not None and addressee in by_id:
                by_id[addressee].spcc += 1
    return records


def _addressee(quote_id, quotes, mention_spans, index_to_sentence, speaker_of):
    quote = next((q for q in quotes if q.id == quote_id), None)
    if quote is None:
        return None
    s_lo = index_to_sentence.get(quote.start)
    s_hi = index_to_sentence.get(quote.end)
    if s_lo is None or s_hi is None:
        return None
    speaker = speaker_of.get(quote_id)
    best = None
    for start, end, char_id in mention_spans:
        if char_id == speaker:
            continue
        if quote.start <= start <= quote.end:
            continue
        s = index_to_sentence.get(start)
        if s is None or not (s_lo <= s <= s_hi):
            continue
        distance = (start - quote.end) if start > quote.end else (quote.start - end)
        key = (distance, start)
        if best is None or key < best[0]:
            best = (key, char_id)
    return best[1] if best else None


def _spans_from_stamps(tokens):
    spans = []
    current = None
    for token in tokens:
        if token.character_id is None:
            current = None
            continue
        if (current is not None and current[2] == token.character_id
                and token.index == current[1] + 1):
            current = (current[0], token.index, current[2])
            spans[-1] = current
        else:
            current = (token.index, token.index, token.character_id)
            spans.append(current)
    return spans


# -- character analytics ----------------------------------------------------------


def build_occurrence_timeline(book, top_k=10):
    """Normalized mention positions for the most frequent characters.

    Positions and chapter breaks are token indices divided by the total
    token count. Breaks mark the first token of every section after the
    first.
    """
    total = book.token_count()
    if total == 0:
        return {"characters": [], "chapter_breaks": []}
    ranked = sorted(book.characters,
                    key=lambda r: (-r.count, r.mention_token_indices[0]
                                   if r.mention_token_indices else 0))
    rows = []
    for record in ranked[:top_k]:
        rows.append({
            "id": record.id,
            "name": record.canonical_name,
            "gender": record.gender,
            "positions": [index / total for index in record.mention_token_indices],
        })
    breaks = []
    seen = 0
    for section in book.body[:-1]:
        seen += sum(len(s.tokens) for p in section.paragraphs
                    for s in p.sentences)
        breaks.append(seen / total)
    return {"characters": rows, "chapter_breaks": breaks}


def build_interaction_network(records, window=30, min_co=5):
    """Co-occurrence graph over character mention positions.

    The weight of pair (A, B) counts unordered mention pairs at most
    ``window`` tokens apart; an edge exists when the count exceeds
    ``min_co``.
    """
    nodes = [{"id": r.id, "name": r.canonical_name, "count": r.count,
              "gender": r.gender} for r in sorted(records, key=lambda r: r.id)]
    edges = []
    ordered = sorted(records, key=lambda r: r.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            weight = _co_count(a.mention_token_indices,
                               b.mention_token_indices, window)
            if weight > min_co:
                edges.append({"a": a.id, "b": b.id, "weight": weight})
    return {"nodes": nodes, "edges": edges}


def _co_count(a_positions, b_positions, window):
    count = 0
    for a in a_positions:
        lo = bisect_left(b_positions, a - window)
        hi = bisect_right(b_positions, a + window)
        count += hi - lo
    return count


def protagonist_stats(records):
    """Most frequent character and the top-2 mention ratio.

    Ties break toward the earlier first mention. With fewer than two
    characters the ratio is None.
    """
    if not records:
        return None, None
    ranked = sorted(records,
                    key=lambda r: (-r.count, r.mention_token_indices[0]
                                   if r.mention_token_indices else 0))
    protagonist = ranked[0]
    if len(ranked) < 2 or ranked[1].count == 0:
        return protagonist, None
    return protagonist, ranked[0].count / ranked[1].count
