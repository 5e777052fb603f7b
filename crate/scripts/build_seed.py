#!/usr/bin/env python3
"""Build the labeled seed corpus used by the acceptance suite.

Source: the public-domain Project Gutenberg texts bundled in the PyPI sdist
`shakespeare==0.6` (Shakespeare plays and poems, Milton). One document per
blank-line separated paragraph, labeled by genre, tokens = runs of letters
and apostrophes with case preserved.

    pip download --no-deps shakespeare==0.6 -d /tmp/pd
    tar xzf /tmp/pd/shakespeare-0.6.tar.gz -C /tmp/pd
    python3 scripts/build_seed.py /tmp/pd/shakespeare-0.6 | gzip -n -9 > data/seed_corpus.tsv.gz
"""
import pathlib
import re
import sys

COMEDY = """alls_well_that_ends_well as_you_like_it comedy_of_errors loves_labours_lost
measure_for_measure merchant_of_venice merry_wives_of_windsor midsummer_nights_dream
much_ado_about_nothing taming_of_the_shrew tempest twelfth_night two_gentlemen_of_verona
winters_tale cymbeline pericles troilus_and_cressida""".split()
HISTORY = """henry_iv_part_1 henry_iv_part_2 henry_v henry_vi_part_1 henry_vi_part_2
henry_vi_part_3 henry_viii john richard_ii richard_iii""".split()
TRAGEDY = """antony_and_cleopatra coriolanus hamlet julius_caesar lear macbeth othello
romeo_and_juliet timon_of_athens tragedy_of_titus_andronicus""".split()
POETRY = """lovers_complaint passionate_pilgrim phoenix_and_the_turtle rape_of_lucrece
sonnets""".split()
MILTON = [
    "paradise_lost_(no_introduction)_gut",
    "paradise_regained_gut",
    "poetical_works_gut",
    "areopagitica_gut",
]

TOKEN = re.compile(r"[A-Za-z']+")


def sources(root):
    texts = root / "shksprdata" / "texts"
    for genre, names in (("comedy", COMEDY), ("history", HISTORY),
                         ("tragedy", TRAGEDY), ("poetry", POETRY)):
        for name in names:
            yield genre, texts / f"{name}_gut.txt"
    for name in MILTON:
        genre = "prose" if name.startswith("areopagitica") else "poetry"
        yield genre, root / "miltondata" / "texts" / f"{name}.txt"


def main():
    root = pathlib.Path(sys.argv[1])
    out = sys.stdout
    for genre, path in sources(root):
        text = path.read_text(encoding="latin-1")
        for para in re.split(r"\n\s*\n", text):
            tokens = [t.strip("'") for t in TOKEN.findall(para)]
            tokens = [t for t in tokens if t]
            if tokens:
                out.write(genre + "\t" + " ".join(tokens) + "\n")


if __name__ == "__main__":
    main()
