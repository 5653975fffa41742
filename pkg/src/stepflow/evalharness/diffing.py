"""Word-level revision-effort counting.

The edit script between an original and a revised draft is produced by the
Ratcliff-Obershelp recursion: find the longest matching token block, recurse
on both flanks, and read the gaps off as insert/delete/replace opcodes.

The recursion also reports whether any longest-match tie occurred; when it is
unambiguous the opcode count is a minimal span edit script, which the test
suite verifies exhaustively against a brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Opcode = tuple[str, int, int, int, int]  # tag, a_start, a_end, b_start, b_end


@dataclass(frozen=True)
class EditCounts:
    insertions: int
    deletions: int
    replacements: int
    total_edits: int


def _longest_match(
    a: Sequence, b: Sequence, alo: int, ahi: int, blo: int, bhi: int
) -> tuple[int, int, int, bool]:
    """Longest matching block in a[alo:ahi] x b[blo:bhi].

    Ties are broken toward the earliest start in `a`, then in `b`; the last
    element of the result records whether a tie existed at the winning size.
    """
    besti, bestj, bestsize = alo, blo, 0
    tied = False
    lengths: dict[int, int] = {}
    for i in range(alo, ahi):
        new_lengths: dict[int, int] = {}
        item = a[i]
        for j in range(blo, bhi):
            if b[j] == item:
                k = lengths.get(j - 1, 0) + 1
                new_lengths[j] = k
                if k > bestsize:
                    besti, bestj, bestsize = i - k + 1, j - k + 1, k
                    tied = False
                elif k == bestsize and (i - k + 1, j - k + 1) != (besti, bestj):
                    tied = True
        lengths = new_lengths
    return besti, bestj, bestsize, tied


def _matching_blocks(
    a: Sequence, b: Sequence, alo: int, ahi: int, blo: int, bhi: int,
    blocks: list[tuple[int, int, int]], ambiguity: list[bool],
) -> None:
    i, j, size, tied = _longest_match(a, b, alo, ahi, blo, bhi)
    if tied:
        ambiguity[0] = True
    if size == 0:
        return
    _matching_blocks(a, b, alo, i, blo, j, blocks, ambiguity)
    blocks.append((i, j, size))
    _matching_blocks(a, b, i + size, ahi, j + size, bhi, blocks, ambiguity)


def word_opcodes(a: Sequence, b: Sequence) -> list[Opcode]:
    return _opcodes_with_ambiguity(a, b)[0]


def _opcodes_with_ambiguity(a: Sequence, b: Sequence) -> tuple[list[Opcode], bool]:
    blocks: list[tuple[int, int, int]] = []
    ambiguity = [False]
    _matching_blocks(a, b, 0, len(a), 0, len(b), blocks, ambiguity)
    blocks.append((len(a), len(b), 0))  # sentinel

    opcodes: list[Opcode] = []
    ai = bi = 0
    for i, j, size in blocks:
        if ai < i and bi < j:
            opcodes.append(("replace", ai, i, bi, j))
        elif ai < i:
            opcodes.append(("delete", ai, i, bi, j))
        elif bi < j:
            opcodes.append(("insert", ai, i, bi, j))
        if size:
            opcodes.append(("equal", i, i + size, j, j + size))
        ai, bi = i + size, j + size
    return opcodes, ambiguity[0]


def count_edits(opcodes: list[Opcode], mode: str = "span") -> EditCounts:
    """Aggregate opcodes into edit counts.

    span mode counts one edit per contiguous opcode span; word mode counts
    individual tokens, with a replace span of unequal width decomposed into
    min-width replacements plus the surplus insertions or deletions.
    """
    if mode not in ("span", "word"):
        raise ValueError(f"unknown counting mode {mode!r}")
    insertions = deletions = replacements = 0
    for tag, a1, a2, b1, b2 in opcodes:
        if tag == "equal":
            continue
        if mode == "span":
            if tag == "insert":
                insertions += 1
            elif tag == "delete":
                deletions += 1
            else:
                replacements += 1
        else:
            la, lb = a2 - a1, b2 - b1
            if tag == "insert":
                insertions += lb
            elif tag == "delete":
                deletions += la
            else:
                replacements += min(la, lb)
                if lb > la:
                    insertions += lb - la
                elif la > lb:
                    deletions += la - lb
    return EditCounts(
        insertions=insertions,
        deletions=deletions,
        replacements=replacements,
        total_edits=insertions + deletions + replacements,
    )


def word_diff(original: Sequence, revised: Sequence, mode: str = "span") -> EditCounts:
    """Edit counts between two token sequences."""
    return count_edits(word_opcodes(original, revised), mode=mode)


def diff_is_ambiguous(a: Sequence, b: Sequence) -> bool:
    """True when some recursion level had a longest-match tie."""
    return _opcodes_with_ambiguity(a, b)[1]
