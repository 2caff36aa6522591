"""Coordinate text format for matrices and vectors.

::

    ring=<tag> rows=<m> cols=<n> nnz=<k> [key=value ...]
    <i> <j> <value>      (k lines, 1-based, any order)

Values are decimal for Z and F_p, hex bit patterns for F_2^b.  Vectors are
single-column matrices.  Extra header keys are preserved as metadata.
"""

from __future__ import annotations

from pathlib import Path

from .algebra import ring_from_tag
from .sparse import SparseMat, SparseVec


class FormatError(ValueError):
    pass


def dumps(M: SparseMat, **meta) -> str:
    fmt = M.ring.format
    head = f"ring={M.ring.tag} rows={M.rows} cols={M.cols} nnz={M.nnz}"
    if meta:
        head += " " + " ".join(f"{k}={v}" for k, v in meta.items())
    lines = [head]
    lines += [f"{i + 1} {j + 1} {fmt(v)}" for i, j, v in M.entries()]
    return "\n".join(lines) + "\n"


def loads(text: str, with_meta: bool = False):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        header = dict(kv.split("=", 1) for kv in lines[0].split())
        ring = ring_from_tag(header.pop("ring"))
        rows, cols, nnz = (int(header.pop(k)) for k in ("rows", "cols", "nnz"))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad header {lines[0]!r}: {exc}") from exc
    body = lines[1:]
    if len(body) != nnz:
        raise FormatError(f"header says nnz={nnz} but file has {len(body)} entries")
    entries = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 3:
            raise FormatError(f"bad entry line {ln!r}")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            v = ring.parse(parts[2])
        except ValueError as exc:
            raise FormatError(f"bad entry line {ln!r}: {exc}") from exc
        if ring.is_zero(v):
            raise FormatError(f"explicit zero at ({i + 1}, {j + 1})")
        entries.append((i, j, v))
    try:
        M = SparseMat.from_entries(ring, rows, cols, entries)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return (M, header) if with_meta else M


def save(path, M: SparseMat, **meta):
    Path(path).write_text(dumps(M, **meta))


def load(path, with_meta: bool = False):
    return loads(Path(path).read_text(), with_meta)


def vec_to_mat(ring, x: SparseVec) -> SparseMat:
    return SparseMat(ring, x.length, 1, (x,))


def mat_to_vec(M: SparseMat) -> SparseVec:
    if M.cols != 1:
        raise FormatError(f"expected a single column, got {M.cols}")
    return M.columns[0]
