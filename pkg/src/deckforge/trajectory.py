"""Trajectory containers, atom selections, and multi-frame GRO reading."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtomCountChangedError,
    EmptyStructureError,
    SelectionSyntaxError,
)
from .structure import Structure, parse_gro

log = logging.getLogger(__name__)

BACKBONE_NAMES = frozenset({"N", "CA", "C", "O"})


@dataclass
class Frame:
    step: int
    time_ps: float
    box: np.ndarray  # (3, 3) nm
    positions: np.ndarray  # (natoms, 3) nm, float64
    precision: float = 0.0  # fixed-point precision the frame was stored with

    @property
    def atom_count(self) -> int:
        return int(self.positions.shape[0])


@dataclass
class Trajectory:
    atom_count: int
    frames: list[Frame] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    def positions_array(self) -> np.ndarray:
        """All coordinates as one (nframes, natoms, 3) array."""
        return np.stack([f.positions for f in self.frames])

    def times(self) -> np.ndarray:
        return np.array([f.time_ps for f in self.frames], dtype=np.float64)


def make_trajectory(frames: list[Frame]) -> Trajectory:
    """Build a trajectory, enforcing a constant atom count."""
    if not frames:
        return Trajectory(atom_count=0, frames=[])
    count = frames[0].atom_count
    for i, frame in enumerate(frames):
        if frame.atom_count != count:
            raise AtomCountChangedError(i, count, frame.atom_count)
    return Trajectory(atom_count=count, frames=list(frames))


# ---------------------------------------------------------------------------
# selections

_NAME_LIST_RE = re.compile(r"^name\s+([A-Za-z0-9'*,\s]+)$")
_RESID_RE = re.compile(r"^resid\s+(\d+)\s*-\s*(\d+)$")


@dataclass(frozen=True)
class Selection:
    expression: str
    indices: tuple

    def __len__(self) -> int:
        return len(self.indices)


def resolve_selection(structure: Structure, expression: str) -> Selection:
    """Resolve a selection expression against a structure.

    Grammar: ``all`` | ``backbone`` | ``name <id>[,<id>...]`` |
    ``resid <a>-<b>``.  A selection that matches nothing is legal but logged,
    since analysis on it will be refused later with a clearer error.
    """
    expr = " ".join(expression.split())
    if not expr:
        raise SelectionSyntaxError("empty selection expression")
    lowered = expr.lower()

    if lowered == "all":
        indices = tuple(range(len(structure.atoms)))
    elif lowered == "backbone":
        indices = tuple(
            i for i, a in enumerate(structure.atoms)
            if a.name.upper() in BACKBONE_NAMES and not a.hetero
        )
    elif lowered.startswith("name"):
        m = _NAME_LIST_RE.match(expr)
        if not m:
            raise SelectionSyntaxError(f"bad name list in {expression!r}")
        wanted = {token.strip().upper() for token in m.group(1).split(",") if token.strip()}
        if not wanted:
            raise SelectionSyntaxError(f"no atom names given in {expression!r}")
        indices = tuple(i for i, a in enumerate(structure.atoms) if a.name.upper() in wanted)
    elif lowered.startswith("resid"):
        m = _RESID_RE.match(expr)
        if not m:
            raise SelectionSyntaxError(
                f"bad residue range in {expression!r}; expected resid <a>-<b>"
            )
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise SelectionSyntaxError(f"reversed residue range {lo}-{hi}")
        indices = tuple(
            i for i, a in enumerate(structure.atoms) if lo <= a.residue_seq <= hi
        )
    else:
        raise SelectionSyntaxError(
            f"cannot parse selection {expression!r}; expected all, backbone, "
            "name <id>[,<id>...], or resid <a>-<b>"
        )

    if not indices:
        log.warning("selection %r matches no atoms", expression)
    return Selection(expression=expr, indices=indices)


# ---------------------------------------------------------------------------
# multi-frame GRO

_TIME_RE = re.compile(r"\bt\s*=\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)")
_STEP_RE = re.compile(r"\bstep\s*=\s*(\d+)")


def read_gro_trajectory(text: str) -> Trajectory:
    """Read concatenated GRO blocks as a trajectory.

    Frame times come from a ``t=`` token in each title line when present,
    otherwise the frame index is used.  Decreasing times are tolerated with
    a logged warning; some concatenation workflows produce them.
    """
    lines = text.splitlines()
    frames: list[Frame] = []
    pos = 0
    expected: int | None = None
    last_time: float | None = None

    while pos < len(lines):
        if not lines[pos].strip() and pos + 1 >= len(lines):
            break
        if pos + 1 >= len(lines):
            raise EmptyStructureError("trailing junk after last frame")
        try:
            declared = int(lines[pos + 1].strip())
        except ValueError:
            raise EmptyStructureError(
                f"line {pos + 2}: expected an atom count"
            ) from None
        block = lines[pos : pos + declared + 3]
        structure = parse_gro("\n".join(block) + "\n")
        count = len(structure.atoms)
        if expected is None:
            expected = count
        elif count != expected:
            raise AtomCountChangedError(len(frames), expected, count)

        title = structure.title
        tm = _TIME_RE.search(title)
        time_ps = float(tm.group(1)) if tm else float(len(frames))
        sm = _STEP_RE.search(title)
        step = int(sm.group(1)) if sm else len(frames)
        if last_time is not None and time_ps < last_time:
            log.warning(
                "frame %d time %.6g ps is earlier than previous %.6g ps",
                len(frames), time_ps, last_time,
            )
        last_time = time_ps

        positions = np.array(
            [[a.x, a.y, a.z] for a in structure.atoms], dtype=np.float64
        )
        box = np.array(structure.box, dtype=np.float64) if structure.box is not None \
            else np.zeros((3, 3))
        frames.append(Frame(step=step, time_ps=time_ps, box=box, positions=positions))
        pos += declared + 3

    if not frames:
        raise EmptyStructureError("no frames found")
    return Trajectory(atom_count=expected or 0, frames=frames)
