"""Plain-text formats: triplet matrices, edge lists, opinion vectors.

Triplet file::

    # comment
    n nnz_offdiag
    i diag_value [b_i]      (n lines)
    i j value               (nnz_offdiag lines)

The right-hand side rides along as an optional third column of the diagonal
lines; either every diagonal line carries it or none does (then b = 0).
Indices are 0-based and '#' starts a comment anywhere on a line.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DDWalkError, ParseError
from .system import SparseDDSystem, from_triplets


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _num(tok: str, lineno: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot read {tok!r} as {kind.__name__}") from None


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def parse_triplets(text: str) -> SparseDDSystem:
    lines = list(_data_lines(text))
    if not lines:
        raise ParseError("empty matrix file")
    lineno, head = lines[0]
    if len(head) != 2:
        raise ParseError(f"line {lineno}: expected 'n nnz_offdiag'")
    n, nnz = _num(head[0], lineno, int), _num(head[1], lineno, int)
    if n < 1 or nnz < 0:
        raise ParseError(f"line {lineno}: bad sizes n={n}, nnz={nnz}")
    if len(lines) != 1 + n + nnz:
        raise ParseError(f"expected {n} diagonal and {nnz} off-diagonal lines, "
                         f"found {len(lines) - 1} data lines")
    diag, b, with_b = [], np.zeros(n), None
    for lineno, tok in lines[1:1 + n]:
        if len(tok) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'i diag [b]'")
        if with_b is None:
            with_b = len(tok) == 3
        elif with_b != (len(tok) == 3):
            raise ParseError(f"line {lineno}: b column given on some diagonal lines only")
        i = _num(tok[0], lineno, int)
        diag.append((i, _num(tok[1], lineno)))
        if with_b:
            if not 0 <= i < n:
                raise ParseError(f"line {lineno}: index {i} outside [0, {n})")
            b[i] = _num(tok[2], lineno)
    off = []
    for lineno, tok in lines[1 + n:]:
        if len(tok) != 3:
            raise ParseError(f"line {lineno}: expected 'i j value'")
        off.append((_num(tok[0], lineno, int), _num(tok[1], lineno, int), _num(tok[2], lineno)))
    try:
        return from_triplets(n, diag, off, b)
    except DDWalkError as e:
        raise ParseError(str(e)) from e


def read_triplets(path) -> SparseDDSystem:
    return parse_triplets(_read(path))


def format_triplets(S: SparseDDSystem, header: Iterable[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    out.append(f"{S.n} {S.nnz_offdiag}")
    out += [f"{i} {float(S.diag[i])!r} {float(S.b[i])!r}" for i in range(S.n)]
    for u in range(S.n):
        out += [f"{u} {v} {w!r}" for v, w in S.row(u)]
    return "\n".join(out) + "\n"


def write_triplets(path, S: SparseDDSystem, header: Iterable[str] = ()) -> None:
    Path(path).write_text(format_triplets(S, header))


def read_edges(path) -> tuple[list[tuple[int, int, float]], int]:
    """Edge list 'u v [w]'; returns (edges, 1 + largest vertex id)."""
    edges, top = [], -1
    for lineno, tok in _data_lines(_read(path)):
        if len(tok) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v [w]'")
        u, v = _num(tok[0], lineno, int), _num(tok[1], lineno, int)
        w = _num(tok[2], lineno) if len(tok) == 3 else 1.0
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex id")
        edges.append((u, v, w))
        top = max(top, u, v)
    return edges, top + 1


def write_edges(path, edges: Iterable[tuple]) -> None:
    lines = []
    for e in edges:
        w = float(e[2]) if len(e) > 2 else 1.0
        lines.append(f"{int(e[0])} {int(e[1])} {w!r}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_opinions(path, n: Optional[int] = None) -> np.ndarray:
    vals = []
    for lineno, tok in _data_lines(_read(path)):
        if len(tok) != 1:
            raise ParseError(f"line {lineno}: expected one value")
        vals.append(_num(tok[0], lineno))
    if n is not None and len(vals) != n:
        raise ParseError(f"{len(vals)} opinions for {n} vertices")
    return np.array(vals, dtype=float)


def write_opinions(path, values) -> None:
    Path(path).write_text("".join(f"{float(x)!r}\n" for x in values))


def instance_header(h, family: int) -> str:
    return (f"hardgen k={h.k} d={h.d} wG={h.w_gprime} wB={h.w_b} "
            f"gamma={h.gamma!r} family={int(family)}")


def write_instance(path, h, family: int) -> None:
    """Triplet export of one family of a hard instance with its metadata line."""
    write_triplets(path, h.system(family), [instance_header(h, family)])


def read_instance_meta(path) -> dict:
    """Fields of the metadata line of an exported instance."""
    for raw in _read(path).splitlines():
        s = raw.strip()
        if s.startswith("# hardgen "):
            meta = dict(kv.split("=", 1) for kv in s[len("# hardgen "):].split())
            return {"k": int(meta["k"]), "d": int(meta["d"]), "wG": int(meta["wG"]),
                    "wB": int(meta["wB"]), "gamma": float(meta["gamma"]),
                    "family": int(meta["family"])}
    raise ParseError(f"{path}: no hardgen metadata line")
