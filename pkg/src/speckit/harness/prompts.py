"""Bundled public-domain text snippets used as desk-scale prompt sources."""

from __future__ import annotations

# Lewis Carroll, "Alice's Adventures in Wonderland" (1865).
ALICE = (
    "Alice was beginning to get very tired of sitting by her sister on the "
    "bank, and of having nothing to do: once or twice she had peeped into "
    "the book her sister was reading, but it had no pictures or "
    "conversations in it."
)

# Abraham Lincoln, Gettysburg Address (1863).
GETTYSBURG = (
    "Four score and seven years ago our fathers brought forth on this "
    "continent, a new nation, conceived in Liberty, and dedicated to the "
    "proposition that all men are created equal."
)

# Jane Austen, "Pride and Prejudice" (1813).
AUSTEN = (
    "It is a truth universally acknowledged, that a single man in "
    "possession of a good fortune, must be in want of a wife."
)

SNIPPETS = {"alice": ALICE, "gettysburg": GETTYSBURG, "austen": AUSTEN}

DEFAULT_CORPUS = "\n".join([ALICE, GETTYSBURG, AUSTEN])
