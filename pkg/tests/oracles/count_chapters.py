#!/usr/bin/env python3
"""Independent chapter-count oracle.

Counts chapter heading lines in a raw Gutenberg-style text with a plain
line scan: a line counts when it sits between the START/END markers, is
blank-surrounded, is at most 60 characters, and looks like
``CHAPTER <number>`` with an arabic, roman, or spelled number. The scan
shares no code with the pipeline; it exists to cross-check segmentation.

Usage: count_chapters.py FILE [FILE...]
Prints ``<count>\t<file>`` per input.
"""

import re
import sys

START = re.compile(r"^\*{3}\s*START OF (THE|THIS) PROJECT GUTENBERG", re.I)
END = re.compile(r"^\*{3}\s*END OF (THE|THIS) PROJECT GUTENBERG", re.I)

ONES = "one two three four five six seven eight nine".split()
TEENS = ("ten eleven twelve thirteen fourteen fifteen sixteen seventeen "
         "eighteen nineteen").split()
TENS = "twenty thirty forty fifty sixty seventy eighty ninety".split()
SPELLED = set(ONES + TEENS + TENS)
for tens_word in TENS:
    for ones_word in ONES:
        SPELLED.add(f"{tens_word}-{ones_word}")

HEADING = re.compile(r"^chapter\b[\s.:—–-]*(\S.*)?$", re.I)
ROMAN = re.compile(r"^[ivxlcdm]+$", re.I)
ARABIC = re.compile(r"^\d{1,4}$")


def is_number_word(fragment):
    fragment = fragment.strip().strip(".:;,").strip().lower()
    head = re.split(r"[.:—–]", fragment, maxsplit=1)[0].strip()
    for probe in (fragment, head, head.split()[0] if head.split() else ""):
        if not probe:
            continue
        if ARABIC.match(probe) or ROMAN.match(probe) or probe in SPELLED:
            return True
        if probe.startswith("the ") and probe[4:] in SPELLED:
            return True
    return False


def count_chapter_lines(text):
    lines = text.splitlines()
    inside = False
    count = 0
    for i, line in enumerate(lines):
        stripped = line.strip()
        if START.match(stripped):
            inside = True
            continue
        if END.match(stripped):
            inside = False
            continue
        if not inside or not stripped or len(stripped) > 60:
            continue
        prev_blank = i == 0 or not lines[i - 1].strip()
        next_blank = i + 1 >= len(lines) or not lines[i + 1].strip()
        if not (prev_blank and next_blank):
            continue
        match = HEADING.match(stripped)
        if match and match.group(1) and is_number_word(match.group(1)):
            count += 1
    return count


def main(argv):
    if not argv:
        print(__doc__, file=sys.stderr)
        return 2
    for path in argv:
        with open(path, encoding="utf-8", errors="replace") as fh:
            print(f"{count_chapter_lines(fh.read())}\t{path}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
