"""SDPA sparse-format (".dat-s") interchange for block problems.

The exporter first eliminates free scalar variables and dependent equality
rows (the same presolve the solver applies), because the format only speaks
PSD blocks.  The file then encodes

    maximize/minimize  F0 . Y   subject to   Fj . Y = c_j,  Y >= 0

as the usual ``matno blkno i j value`` entry list (1-indexed, upper
triangle, matrix 0 being the objective).  Two comment headers carry what
the bare format cannot: ``*SENSE`` (maximize / minimize / feasibility) and
``*OFFSET`` (the additive constant collected during scalar elimination), so
a file re-imported with ``read_sdpa`` solves to the same optimum as the
original problem.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from .cones import BlockSdp, BlockSpec, Constraint, Objective
from .sdp import _Presolved, _svec_to_blocks

_ENTRY_EPS = 0.0  # exact zeros are omitted; everything else is written


def dumps_sdpa(problem: BlockSdp) -> str:
    """Render a problem as SDPA sparse text (after scalar/row presolve)."""
    pre = _Presolved(problem)
    if pre.infeasible_reason is not None:
        raise ValueError(f"cannot export: {pre.infeasible_reason}")
    sizes = pre.sizes
    m = pre.Astd.shape[0]

    lines = [
        "*SOCFOPT SDPA sparse export",
        f"*SENSE {problem.sense}",
        f"*OFFSET {float(pre.const_red)!r}",
        f"{m}",
        f"{len(sizes)}",
        " ".join(str(n) for n in sizes),
        " ".join(repr(float(v)) for v in pre.bstd),
    ]

    def emit(matno: int, vec) -> None:
        for b, mat in enumerate(_svec_to_blocks(vec, sizes, pre.offsets)):
            n = sizes[b]
            for i in range(n):
                for j in range(i, n):
                    v = float(mat[i, j])
                    if v != _ENTRY_EPS:
                        lines.append(f"{matno} {b + 1} {i + 1} {j + 1} {v!r}")

    emit(0, pre.cvec_red)
    for r in range(m):
        emit(r + 1, pre.Astd[r])
    return "\n".join(lines) + "\n"


def write_sdpa(problem: BlockSdp, path: Union[str, Path]) -> Path:
    """Write ``problem`` to ``path`` in SDPA sparse format; returns the path."""
    path = Path(path)
    path.write_text(dumps_sdpa(problem))
    return path


def _tokens(line: str) -> list[str]:
    for junk in "(){},":
        line = line.replace(junk, " ")
    return line.split()


def loads_sdpa(text: str) -> BlockSdp:
    """Parse SDPA sparse text into a block problem (inverse of ``dumps_sdpa``)."""
    sense = "maximize"
    offset = 0.0
    data_lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("*") or line.startswith('"'):
            upper = line.lstrip('*" ').strip()
            if upper.upper().startswith("SENSE"):
                sense = upper.split(None, 1)[1].strip().lower()
            elif upper.upper().startswith("OFFSET"):
                offset = float(upper.split(None, 1)[1])
            continue
        data_lines.append(line)

    tokens: list[str] = []
    for line in data_lines:
        tokens.extend(_tokens(line))
    pos = 0

    def take(n: int) -> list[str]:
        nonlocal pos
        if pos + n > len(tokens):
            raise ValueError("truncated SDPA file")
        out = tokens[pos : pos + n]
        pos += n
        return out

    m = int(take(1)[0])
    nblocks = int(take(1)[0])
    raw_sizes = [int(t) for t in take(nblocks)]
    # Negative sizes mark diagonal blocks in the wild; we keep them dense.
    sizes = [abs(s) for s in raw_sizes]
    rhs = [float(t) for t in take(m)]

    obj_entries: list[tuple[int, int, int, float]] = []
    row_entries: list[list[tuple[int, int, int, float]]] = [[] for _ in range(m)]
    while pos < len(tokens):
        matno, blkno, i, j, val = take(5)
        matno, blkno, i, j = int(matno), int(blkno), int(i), int(j)
        value = float(val)
        if not 1 <= blkno <= nblocks:
            raise ValueError(f"block index {blkno} out of range")
        n = sizes[blkno - 1]
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"entry ({i},{j}) outside block {blkno} of size {n}")
        if i > j:
            i, j = j, i
        entry = (blkno - 1, i - 1, j - 1, value)
        if matno == 0:
            obj_entries.append(entry)
        elif 1 <= matno <= m:
            row_entries[matno - 1].append(entry)
        else:
            raise ValueError(f"matrix index {matno} out of range")

    if sense not in ("maximize", "minimize", "feasibility"):
        raise ValueError(f"unknown sense {sense!r}")
    constraints = tuple(
        Constraint(entries=tuple(sorted(ent)), rhs=rhs[r], label=f"row {r + 1}")
        for r, ent in enumerate(row_entries)
    )
    return BlockSdp(
        blocks=tuple(BlockSpec(n, f"block {b + 1}") for b, n in enumerate(sizes)),
        scalars=(),
        constraints=constraints,
        objective=Objective(entries=tuple(sorted(obj_entries)), constant=offset),
        sense=sense,
        meta={"kind": "imported_sdpa"},
    )


def read_sdpa(path: Union[str, Path]) -> BlockSdp:
    """Read an SDPA sparse file written by ``write_sdpa`` (or compatible)."""
    return loads_sdpa(Path(path).read_text())
