"""Reading, writing and cleaning of molecular structure files.

Two text formats are supported: PDB (fixed-column, angstrom) and GRO
(fixed-column, nanometre).  All coordinates are held in nanometres
internally.  Parsing is strict about the columns that matter (coordinates,
names, numbering) and tolerant about everything else, so that real-world
files with sloppy trailing fields still load.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

from .errors import (
    AtomCountMismatchError,
    BoxMissingError,
    EmptyStructureError,
    MalformedRecordError,
)

log = logging.getLogger(__name__)

# Residue names treated as solvent water across common force fields.
WATER_RESIDUES = frozenset({"HOH", "SOL", "WAT", "TIP3", "TIP4", "T3P", "T4P"})

# Average atomic masses (u) for the elements that occur in biomolecules and
# common ions.  Unknown elements get mass 0 and a logged warning.
ELEMENT_MASSES = {
    "H": 1.008,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "P": 30.974,
    "S": 32.06,
    "NA": 22.990,
    "CL": 35.45,
    "K": 39.098,
    "MG": 24.305,
    "CA": 40.078,
    "ZN": 65.38,
    "FE": 55.845,
    "MN": 54.938,
    "CU": 63.546,
    "F": 18.998,
    "BR": 79.904,
    "I": 126.904,
    "SE": 78.971,
}

_ION_RESIDUES = frozenset({"NA", "CL", "K", "MG", "ZN", "CA", "FE", "MN", "CU", "BR", "I"})


@dataclass(frozen=True)
class Atom:
    serial: int
    name: str
    residue_name: str
    residue_seq: int
    x: float
    y: float
    z: float
    chain_id: str = ""
    element: str = ""
    mass: float = 0.0
    hetero: bool = False

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass
class Structure:
    """An ordered list of atoms plus an optional box.

    ``box`` is a row-vector 3x3 matrix in nanometres (row i is the i-th box
    vector), or ``None`` when the source file carried no box information.
    """

    title: str
    atoms: list[Atom]
    box: list[list[float]] | None = None

    @property
    def atom_count(self) -> int:
        return len(self.atoms)

    def masses(self) -> list[float]:
        return [a.mass for a in self.atoms]


@dataclass
class PrepReport:
    waters_removed: int = 0
    hetero_removed: int = 0
    renumbered: bool = False
    notes: list[str] = field(default_factory=list)


def _decode(source: str | bytes) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8", errors="replace")
    return source


def guess_element(atom_name: str, residue_name: str = "") -> str:
    """Best-effort element symbol from an atom name.

    PDB names like ``CA`` are ambiguous (alpha carbon vs calcium); the
    residue name disambiguates: a lone CA atom in a CA residue is the ion.
    """
    name = atom_name.strip()
    if not name:
        return ""
    resname = residue_name.strip().upper()
    if resname in _ION_RESIDUES and name.upper() == resname:
        return resname
    # strip leading digits (e.g. "1HB2") then take the leading alpha run
    stripped = name.lstrip("0123456789")
    alpha = ""
    for ch in stripped:
        if ch.isalpha():
            alpha += ch
        else:
            break
    if not alpha:
        return ""
    two = alpha[:2].upper()
    if two in ELEMENT_MASSES and two not in ("CA",) and len(alpha) >= 2:
        # two-letter match, but never steal CA from alpha carbons
        if two in ("NA", "CL", "MG", "ZN", "FE", "MN", "CU", "BR", "SE"):
            return two
    return alpha[0].upper()


def _mass_for(element: str) -> float:
    return ELEMENT_MASSES.get(element.upper(), 0.0)


def _float_cols(line: str, spans: list[tuple[int, int]], lineno: int) -> list[float]:
    out = []
    for lo, hi in spans:
        text = line[lo:hi].strip()
        try:
            out.append(float(text))
        except ValueError:
            raise MalformedRecordError(lineno, f"bad numeric field {text!r}") from None
    return out


def _box_from_cryst1(line: str, lineno: int) -> list[list[float]] | None:
    try:
        a = float(line[6:15]) / 10.0
        b = float(line[15:24]) / 10.0
        c = float(line[24:33]) / 10.0
        alpha = math.radians(float(line[33:40]))
        beta = math.radians(float(line[40:47]))
        gamma = math.radians(float(line[47:54]))
    except ValueError:
        raise MalformedRecordError(lineno, "bad CRYST1 record") from None
    if a <= 0 or b <= 0 or c <= 0:
        return None
    # crystallographic cell -> triclinic row vectors with v1 along x
    v2x = b * math.cos(gamma)
    v2y = b * math.sin(gamma)
    v3x = c * math.cos(beta)
    v3y = c * (math.cos(alpha) - math.cos(beta) * math.cos(gamma)) / math.sin(gamma)
    v3z2 = c * c - v3x * v3x - v3y * v3y
    v3z = math.sqrt(v3z2) if v3z2 > 0 else 0.0
    box = [[a, 0.0, 0.0], [v2x, v2y, 0.0], [v3x, v3y, v3z]]
    return [[0.0 if abs(x) < 1e-9 else x for x in row] for row in box]


def parse_pdb(source: str | bytes) -> Structure:
    """Parse PDB text into a :class:`Structure` (coordinates in nm).

    Only the first MODEL of a multi-model file is read; later models are
    skipped with a logged warning.  Alternate locations other than blank
    or ``A`` are dropped.  HETATM records are kept and flagged.
    """
    text = _decode(source)
    title = ""
    atoms: list[Atom] = []
    box = None
    model_seen = 0
    in_skipped_model = False
    unknown_elements: set[str] = set()

    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip().upper()
        if record == "MODEL":
            model_seen += 1
            in_skipped_model = model_seen > 1
            continue
        if record == "ENDMDL":
            continue
        if in_skipped_model:
            continue
        if record == "TITLE" and not title:
            title = line[10:].strip()
        elif record == "CRYST1":
            box = _box_from_cryst1(line, lineno)
        elif record in ("ATOM", "HETATM"):
            if len(line) < 54:
                raise MalformedRecordError(lineno, "atom record shorter than 54 columns")
            altloc = line[16:17].strip()
            if altloc not in ("", "A"):
                continue
            serial_text = line[6:11].strip()
            try:
                serial = int(serial_text) if serial_text else len(atoms) + 1
            except ValueError:
                # hybrid-36 / overflowed serials: fall back to sequence order
                serial = len(atoms) + 1
            name = line[12:16].strip()
            resname = line[17:20].strip()
            resseq_text = line[22:26].strip()
            try:
                resseq = int(resseq_text) if resseq_text else 0
            except ValueError:
                raise MalformedRecordError(lineno, f"bad residue number {resseq_text!r}")
            x, y, z = _float_cols(line, [(30, 38), (38, 46), (46, 54)], lineno)
            element = line[76:78].strip().upper() if len(line) >= 77 else ""
            if not element:
                element = guess_element(name, resname)
            mass = _mass_for(element)
            if element and mass == 0.0:
                unknown_elements.add(element)
            atoms.append(
                Atom(
                    serial=serial,
                    name=name,
                    residue_name=resname,
                    residue_seq=resseq,
                    x=x / 10.0,
                    y=y / 10.0,
                    z=z / 10.0,
                    chain_id=line[21:22].strip(),
                    element=element,
                    mass=mass,
                    hetero=(record == "HETATM"),
                )
            )

    if model_seen > 1:
        log.warning("multi-model file: kept model 1, skipped %d more", model_seen - 1)
    if unknown_elements:
        log.warning("unknown elements assigned zero mass: %s", ", ".join(sorted(unknown_elements)))
    if not atoms:
        raise EmptyStructureError("no atom records found")
    return Structure(title=title, atoms=atoms, box=box)


def parse_gro(source: str | bytes) -> Structure:
    """Parse GRO text (coordinates already in nm)."""
    text = _decode(source)
    lines = text.splitlines()
    if len(lines) < 2:
        raise EmptyStructureError("file too short for a header")
    title = lines[0].strip()
    try:
        declared = int(lines[1].strip())
    except ValueError:
        raise MalformedRecordError(2, f"bad atom count {lines[1].strip()!r}") from None
    if declared <= 0:
        raise EmptyStructureError("declared atom count is zero")
    if len(lines) < 2 + declared:
        raise AtomCountMismatchError(
            f"declared {declared} atoms but only {len(lines) - 2} lines follow"
        )

    atoms: list[Atom] = []
    unknown_elements: set[str] = set()
    for i in range(declared):
        lineno = 3 + i
        line = lines[2 + i]
        if len(line) < 44:
            raise MalformedRecordError(lineno, "atom line shorter than 44 columns")
        try:
            resseq = int(line[0:5])
        except ValueError:
            raise MalformedRecordError(lineno, f"bad residue number {line[0:5]!r}") from None
        resname = line[5:10].strip()
        name = line[10:15].strip()
        try:
            serial = int(line[15:20])
        except ValueError:
            raise MalformedRecordError(lineno, f"bad atom number {line[15:20]!r}") from None
        x, y, z = _float_cols(line, [(20, 28), (28, 36), (36, 44)], lineno)
        element = guess_element(name, resname)
        mass = _mass_for(element)
        if element and mass == 0.0:
            unknown_elements.add(element)
        atoms.append(
            Atom(
                serial=serial,
                name=name,
                residue_name=resname,
                residue_seq=resseq,
                x=x,
                y=y,
                z=z,
                element=element,
                mass=mass,
                hetero=resname.upper() in WATER_RESIDUES or resname.upper() in _ION_RESIDUES,
            )
        )

    box = None
    if len(lines) > 2 + declared:
        fields = lines[2 + declared].split()
        if len(fields) >= 3:
            try:
                w = [float(f) for f in fields]
            except ValueError:
                raise MalformedRecordError(3 + declared, "bad box line") from None
            if len(w) >= 9:
                box = [
                    [w[0], w[3], w[4]],
                    [w[5], w[1], w[6]],
                    [w[7], w[8], w[2]],
                ]
            else:
                box = [[w[0], 0.0, 0.0], [0.0, w[1], 0.0], [0.0, 0.0, w[2]]]
    if unknown_elements:
        log.warning("unknown elements assigned zero mass: %s", ", ".join(sorted(unknown_elements)))
    return Structure(title=title, atoms=atoms, box=box)


def _fixed3(value: float) -> str:
    """Format to 3 decimals, ties rounding away from zero, width 8."""
    q = Decimal(repr(float(value))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)
    return f"{q:8.3f}"


def _fixed5(value: float) -> str:
    q = Decimal(repr(float(value))).quantize(Decimal("0.00001"), rounding=ROUND_HALF_UP)
    return f"{q:10.5f}"


def write_gro(structure: Structure) -> str:
    """Render a structure as GRO text.

    Raises :class:`BoxMissingError` when the structure has no box: the format
    requires a box line and inventing one would silently change the system.
    """
    if not structure.atoms:
        raise EmptyStructureError("cannot write a structure with no atoms")
    if structure.box is None:
        raise BoxMissingError("structure has no box vectors")
    out = [structure.title or "structure", f"{len(structure.atoms):5d}"]
    for atom in structure.atoms:
        out.append(
            f"{atom.residue_seq % 100000:5d}"
            f"{atom.residue_name:<5.5s}"
            f"{atom.name:>5.5s}"
            f"{atom.serial % 100000:5d}"
            f"{_fixed3(atom.x)}{_fixed3(atom.y)}{_fixed3(atom.z)}"
        )
    b = structure.box
    diag_only = all(
        abs(b[i][j]) < 5e-7 for i in range(3) for j in range(3) if i != j
    )
    if diag_only:
        out.append(f"{_fixed5(b[0][0])}{_fixed5(b[1][1])}{_fixed5(b[2][2])}")
    else:
        vals = [b[0][0], b[1][1], b[2][2], b[0][1], b[0][2],
                b[1][0], b[1][2], b[2][0], b[2][1]]
        out.append("".join(_fixed5(v) for v in vals))
    return "\n".join(out) + "\n"


def prepare_structure(
    structure: Structure,
    strip_water: bool = True,
    strip_hetero: bool = False,
    renumber: bool = True,
) -> tuple[Structure, PrepReport]:
    """Clean a structure before deck generation.

    Crystallographic waters confuse solvation (the box gets re-solvated
    anyway), so they go by default.  Non-water HETATM groups (ligands,
    cofactors) are kept unless ``strip_hetero`` is set, because dropping a
    ligand silently would change the science.
    """
    report = PrepReport()
    kept: list[Atom] = []
    for atom in structure.atoms:
        is_water = atom.residue_name.upper() in WATER_RESIDUES
        if strip_water and is_water:
            report.waters_removed += 1
            continue
        if strip_hetero and atom.hetero and not is_water:
            report.hetero_removed += 1
            continue
        kept.append(atom)
    if not kept:
        log.warning("cleaning removed every atom")

    if renumber:
        renumbered = []
        for i, atom in enumerate(kept, start=1):
            if atom.serial != i:
                report.renumbered = True
            renumbered.append(replace(atom, serial=i))
        kept = renumbered

    if report.waters_removed:
        report.notes.append(f"removed {report.waters_removed} water atoms")
    if report.hetero_removed:
        report.notes.append(f"removed {report.hetero_removed} hetero atoms")
    if report.renumbered:
        report.notes.append("renumbered atoms sequentially")
    return Structure(title=structure.title, atoms=kept, box=structure.box), report
