"""Built-in parameter ledger: stage tables, enumerations, field metadata.

The five stage tables below are the single source of the run parameters
written into deck files.  Each entry is ``(key, value, comment)``; values may
contain ``{placeholder}`` tokens that are filled from the resolved spec
(temperature, pressure, timestep, step counts, seeds).  Entry order is the
order keys appear in rendered files.

An alternate ledger can be supplied as a JSON file (see ``load_ledger``);
the ``DECKFORGE_DEFAULTS`` environment variable points the CLI and service
at one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import SpecParseError, UnknownStageError


class Stage(str, Enum):
    IONS = "ions"
    EM = "em"
    NVT = "nvt"
    NPT = "npt"
    MD = "md"

    @property
    def label(self) -> str:
        return {"ions": "Ions", "em": "EM", "nvt": "NVT", "npt": "NPT", "md": "MD"}[self.value]

    @property
    def filename(self) -> str:
        return f"{self.value}.mdp"


# one (key, value, comment) triple per parameter line
Entry = tuple[str, str, str]

LEDGER_VERSION = 1

# length of each equilibration phase in picoseconds
EQUILIBRATION_PS = 100.0

# stop minimization once the largest force drops below this (kJ/mol/nm)
EM_TOLERANCE = 500.0

_IONS_TABLE: list[Entry] = [
    ("integrator", "steep", "steepest descent minimization"),
    ("emtol", "1000.0", "stop when max force < 1000.0 kJ/mol/nm"),
    ("emstep", "0.01", "minimization step size"),
    ("nsteps", "50000", "maximum number of minimization steps"),
    ("nstlist", "1", "update neighbor list every step"),
    ("cutoff-scheme", "Verlet", "buffered neighbor searching"),
    ("ns_type", "grid", "search neighboring grid cells"),
    ("coulombtype", "cutoff", "plain cutoff electrostatics suffice here"),
    ("rcoulomb", "1.0", "short-range electrostatic cutoff (nm)"),
    ("rvdw", "1.0", "short-range van der Waals cutoff (nm)"),
    ("pbc", "xyz", "periodic boundary conditions in all directions"),
]

_EM_TABLE: list[Entry] = [
    ("integrator", "steep", "steepest descent minimization"),
    ("emtol", "{em_tolerance}", "stop when max force < {em_tolerance} kJ/mol/nm"),
    ("emstep", "0.01", "minimization step size"),
    ("nsteps", "50000", "maximum number of minimization steps"),
    ("nstlist", "1", "update neighbor list every step"),
    ("cutoff-scheme", "Verlet", "buffered neighbor searching"),
    ("ns_type", "grid", "search neighboring grid cells"),
    ("coulombtype", "PME", "particle-mesh Ewald electrostatics"),
    ("rcoulomb", "1.0", "short-range electrostatic cutoff (nm)"),
    ("rvdw", "1.0", "short-range van der Waals cutoff (nm)"),
    ("pbc", "xyz", "periodic boundary conditions in all directions"),
]

_NVT_TABLE: list[Entry] = [
    ("define", "-DPOSRES", "position restrain the solute"),
    ("integrator", "md", "leap-frog integrator"),
    ("nsteps", "{nsteps_nvt}", "{equilibration_ps} ps at {dt_ps} ps per step"),
    ("dt", "{dt_ps}", "timestep in ps"),
    ("nstxout", "500", "save coordinates every {save_ps} ps"),
    ("nstvout", "500", "save velocities every {save_ps} ps"),
    ("nstenergy", "500", "save energies every {save_ps} ps"),
    ("nstlog", "500", "update log file every {save_ps} ps"),
    ("continuation", "no", "first dynamics run"),
    ("constraint_algorithm", "lincs", "holonomic constraints"),
    ("constraints", "h-bonds", "bonds involving H are constrained"),
    ("lincs_iter", "1", "accuracy of LINCS"),
    ("lincs_order", "4", "also related to accuracy"),
    ("cutoff-scheme", "Verlet", "buffered neighbor searching"),
    ("ns_type", "grid", "search neighboring grid cells"),
    ("nstlist", "10", "largely irrelevant with Verlet"),
    ("rcoulomb", "1.0", "short-range electrostatic cutoff (nm)"),
    ("rvdw", "1.0", "short-range van der Waals cutoff (nm)"),
    ("DispCorr", "EnerPres", "account for cut-off vdW scheme"),
    ("coulombtype", "PME", "particle-mesh Ewald electrostatics"),
    ("pme_order", "4", "cubic interpolation"),
    ("fourierspacing", "0.16", "grid spacing for FFT"),
    ("tcoupl", "V-rescale", "modified Berendsen thermostat"),
    ("tc-grps", "Protein Non-Protein", "two coupling groups, more accurate"),
    ("tau_t", "0.1 0.1", "time constant, in ps"),
    ("ref_t", "{ref_t} {ref_t}", "reference temperature, one per group, in K"),
    ("pcoupl", "no", "no pressure coupling in NVT"),
    ("pbc", "xyz", "periodic boundary conditions in all directions"),
    ("gen_vel", "yes", "assign velocities from Maxwell distribution"),
    ("gen_temp", "{gen_temp}", "temperature for Maxwell distribution"),
    ("gen_seed", "{gen_seed}", "generate a random seed when -1"),
]

_NPT_TABLE: list[Entry] = [
    ("define", "-DPOSRES", "position restrain the solute"),
    ("integrator", "md", "leap-frog integrator"),
    ("nsteps", "{nsteps_npt}", "{equilibration_ps} ps at {dt_ps} ps per step"),
    ("dt", "{dt_ps}", "timestep in ps"),
    ("nstxout", "500", "save coordinates every {save_ps} ps"),
    ("nstvout", "500", "save velocities every {save_ps} ps"),
    ("nstenergy", "500", "save energies every {save_ps} ps"),
    ("nstlog", "500", "update log file every {save_ps} ps"),
    ("continuation", "yes", "continuing from NVT equilibration"),
    ("constraint_algorithm", "lincs", "holonomic constraints"),
    ("constraints", "h-bonds", "bonds involving H are constrained"),
    ("lincs_iter", "1", "accuracy of LINCS"),
    ("lincs_order", "4", "also related to accuracy"),
    ("cutoff-scheme", "Verlet", "buffered neighbor searching"),
    ("ns_type", "grid", "search neighboring grid cells"),
    ("nstlist", "10", "largely irrelevant with Verlet"),
    ("rcoulomb", "1.0", "short-range electrostatic cutoff (nm)"),
    ("rvdw", "1.0", "short-range van der Waals cutoff (nm)"),
    ("DispCorr", "EnerPres", "account for cut-off vdW scheme"),
    ("coulombtype", "PME", "particle-mesh Ewald electrostatics"),
    ("pme_order", "4", "cubic interpolation"),
    ("fourierspacing", "0.16", "grid spacing for FFT"),
    ("tcoupl", "V-rescale", "modified Berendsen thermostat"),
    ("tc-grps", "Protein Non-Protein", "two coupling groups, more accurate"),
    ("tau_t", "0.1 0.1", "time constant, in ps"),
    ("ref_t", "{ref_t} {ref_t}", "reference temperature, one per group, in K"),
    ("pcoupl", "Parrinello-Rahman", "pressure coupling on in NPT"),
    ("pcoupltype", "isotropic", "uniform scaling of box vectors"),
    ("tau_p", "2.0", "time constant, in ps"),
    ("ref_p", "{ref_p}", "reference pressure, in bar"),
    ("compressibility", "4.5e-5", "isothermal compressibility of water, bar^-1"),
    ("refcoord_scaling", "com", "scale restraint reference with the box"),
    ("nstcomm", "100", "remove center of mass motion every 100 steps"),
    ("pbc", "xyz", "periodic boundary conditions in all directions"),
    ("gen_vel", "no", "velocities carried over from NVT"),
]

_MD_TABLE: list[Entry] = [
    ("integrator", "md", "leap-frog integrator"),
    ("nsteps", "{nsteps_md}", "{production_ns} ns at {dt_ps} ps per step"),
    ("dt", "{dt_ps}", "timestep in ps"),
    ("nstxout", "0", "suppress bulky .trr coordinate output"),
    ("nstvout", "0", "suppress .trr velocity output"),
    ("nstfout", "0", "suppress .trr force output"),
    ("nstenergy", "5000", "save energies every {save_md_ps} ps"),
    ("nstlog", "5000", "update log file every {save_md_ps} ps"),
    ("nstxout-compressed", "5000", "compressed trajectory every {save_md_ps} ps"),
    ("compressed-x-grps", "System", "save the whole system"),
    ("continuation", "yes", "continuing from NPT equilibration"),
    ("constraint_algorithm", "lincs", "holonomic constraints"),
    ("constraints", "h-bonds", "bonds involving H are constrained"),
    ("lincs_iter", "1", "accuracy of LINCS"),
    ("lincs_order", "4", "also related to accuracy"),
    ("cutoff-scheme", "Verlet", "buffered neighbor searching"),
    ("ns_type", "grid", "search neighboring grid cells"),
    ("nstlist", "10", "largely irrelevant with Verlet"),
    ("rcoulomb", "1.0", "short-range electrostatic cutoff (nm)"),
    ("rvdw", "1.0", "short-range van der Waals cutoff (nm)"),
    ("DispCorr", "EnerPres", "account for cut-off vdW scheme"),
    ("coulombtype", "PME", "particle-mesh Ewald electrostatics"),
    ("pme_order", "4", "cubic interpolation"),
    ("fourierspacing", "0.16", "grid spacing for FFT"),
    ("tcoupl", "V-rescale", "modified Berendsen thermostat"),
    ("tc-grps", "Protein Non-Protein", "two coupling groups, more accurate"),
    ("tau_t", "0.1 0.1", "time constant, in ps"),
    ("ref_t", "{ref_t} {ref_t}", "reference temperature, one per group, in K"),
    ("pcoupl", "Parrinello-Rahman", "pressure coupling on in production"),
    ("pcoupltype", "isotropic", "uniform scaling of box vectors"),
    ("tau_p", "2.0", "time constant, in ps"),
    ("ref_p", "{ref_p}", "reference pressure, in bar"),
    ("compressibility", "4.5e-5", "isothermal compressibility of water, bar^-1"),
    ("pbc", "xyz", "periodic boundary conditions in all directions"),
    ("gen_vel", "no", "velocities carried over from equilibration"),
    ("ld-seed", "{ld_seed}", "thermostat noise seed, random when -1"),
]

# keys whose rendered value changes when only the temperature changes
TEMPERATURE_KEYS = frozenset({"ref_t", "gen_temp"})
# keys whose rendered value carries the reference pressure
PRESSURE_KEYS = frozenset({"ref_p"})


@dataclass(frozen=True)
class Ledger:
    version: int
    equilibration_ps: float
    em_tolerance: float
    stages: dict[Stage, list[Entry]]

    def table(self, stage: Stage) -> list[Entry]:
        return list(self.stages[stage])


def builtin_ledger() -> Ledger:
    return Ledger(
        version=LEDGER_VERSION,
        equilibration_ps=EQUILIBRATION_PS,
        em_tolerance=EM_TOLERANCE,
        stages={
            Stage.IONS: list(_IONS_TABLE),
            Stage.EM: list(_EM_TABLE),
            Stage.NVT: list(_NVT_TABLE),
            Stage.NPT: list(_NPT_TABLE),
            Stage.MD: list(_MD_TABLE),
        },
    )


def load_ledger(path: str | Path) -> Ledger:
    """Load an alternate ledger from a JSON file.

    Expected shape::

        {"version": 1,
         "equilibration_ps": 100.0,
         "em_tolerance": 500.0,
         "stages": {"ions": [["integrator", "steep", "comment"], ...], ...}}

    Stages omitted from the file fall back to the built-in tables.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    version = raw.get("version", LEDGER_VERSION)
    if version != LEDGER_VERSION:
        raise SpecParseError(1, f"unsupported ledger version {version!r}")
    base = builtin_ledger()
    stages = dict(base.stages)
    for name, rows in raw.get("stages", {}).items():
        try:
            stage = Stage(name.lower())
        except ValueError:
            raise UnknownStageError(f"unknown stage {name!r} in ledger") from None
        table: list[Entry] = []
        for row in rows:
            if not isinstance(row, list) or len(row) not in (2, 3):
                raise SpecParseError(1, f"bad ledger row for stage {name!r}: {row!r}")
            key, value = str(row[0]), str(row[1])
            comment = str(row[2]) if len(row) == 3 else ""
            table.append((key, value, comment))
        stages[stage] = table
    return Ledger(
        version=version,
        equilibration_ps=float(raw.get("equilibration_ps", base.equilibration_ps)),
        em_tolerance=float(raw.get("em_tolerance", base.em_tolerance)),
        stages=stages,
    )


# ---------------------------------------------------------------------------
# enumerations and per-field metadata


FORCEFIELDS = {
    "OPLS-AA": "oplsaa",
    "AMBER99SB": "amber99sb",
    "AMBER03": "amber03",
    "CHARMM27": "charmm27",
    "GROMOS54A7": "gromos54a7",
}

WATER_MODELS = {
    "TIP3P": "tip3p",
    "TIP4P": "tip4p",
    "SPC": "spc",
    "SPC/E": "spce",
}

BOX_TYPES = ("cubic", "dodecahedron", "octahedron", "triclinic")

# 4-point water only makes sense with force fields parameterized for it
THREE_POINT_ONLY_FORCEFIELDS = frozenset({"GROMOS54A7", "CHARMM27"})


@dataclass(frozen=True)
class FieldInfo:
    name: str
    label: str
    kind: str  # "number" | "integer" | "choice" | "text" | "bool" | "seed"
    tooltip: str
    unit: str = ""
    default: object = None
    choices: tuple[str, ...] = ()
    minimum: float | None = None
    maximum: float | None = None
    typical: tuple[float, float] | None = None
    advanced: bool = False

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "label": self.label,
            "kind": self.kind,
            "tooltip": self.tooltip,
            "unit": self.unit,
            "default": self.default,
            "advanced": self.advanced,
        }
        if self.choices:
            d["choices"] = list(self.choices)
        if self.minimum is not None:
            d["minimum"] = self.minimum
        if self.maximum is not None:
            d["maximum"] = self.maximum
        if self.typical is not None:
            d["typical"] = list(self.typical)
        return d


FIELDS: tuple[FieldInfo, ...] = (
    FieldInfo(
        "job_name", "Job name", "text",
        "Name used for the scheduler job and generated files. Letters, digits, "
        "hyphen and underscore only.",
        default="mdsim",
    ),
    FieldInfo(
        "forcefield", "Force field", "choice",
        "Interaction model applied to the solute. Must be paired with a "
        "compatible water model.",
        default="OPLS-AA", choices=tuple(FORCEFIELDS),
    ),
    FieldInfo(
        "water_model", "Water model", "choice",
        "Explicit solvent model. A force field expecting 3-point water will "
        "not run with a 4-point model.",
        default="TIP3P", choices=tuple(WATER_MODELS),
    ),
    FieldInfo(
        "temperature", "Temperature", "number",
        "Thermostat reference temperature for equilibration and production.",
        unit="K", default=300.0, minimum=1e-9, typical=(250.0, 400.0),
    ),
    FieldInfo(
        "pressure", "Pressure", "number",
        "Barostat reference pressure for NPT equilibration and production.",
        unit="bar", default=1.0, minimum=1e-9,
    ),
    FieldInfo(
        "timestep", "Timestep", "number",
        "Integration timestep. Values between 1 and 5 fs are typical; larger "
        "steps are unstable with constrained H bonds.",
        unit="fs", default=2.0, minimum=1e-9, typical=(1.0, 5.0),
    ),
    FieldInfo(
        "production_duration", "Production duration", "number",
        "Length of the production run.",
        unit="ns", default=10.0, minimum=1e-9,
    ),
    FieldInfo(
        "box_type", "Box type", "choice",
        "Shape of the periodic simulation cell.",
        default="cubic", choices=BOX_TYPES,
    ),
    FieldInfo(
        "box_padding", "Box padding", "number",
        "Minimum distance between the solute and the box edge.",
        unit="nm", default=1.0, minimum=0.0,
    ),
    FieldInfo(
        "neutralize", "Neutralize charge", "bool",
        "Add counter-ions until the net system charge is zero.",
        default=True,
    ),
    FieldInfo(
        "positive_ion", "Positive ion", "text",
        "Cation species added during neutralization (typically sodium).",
        default="NA", advanced=True,
    ),
    FieldInfo(
        "negative_ion", "Negative ion", "text",
        "Anion species added during neutralization (typically chloride).",
        default="CL", advanced=True,
    ),
    FieldInfo(
        "molecule_count", "Molecule count", "integer",
        "Copies of the input molecule placed in the box.",
        default=1, minimum=1,
    ),
    FieldInfo(
        "random_seed", "Random seed", "seed",
        "Seed for velocity generation and thermostat noise. Leave unset for "
        "a scheduler-chosen seed (written as -1).",
        default=None, advanced=True,
    ),
    FieldInfo(
        "hardware.nodes", "Nodes", "integer",
        "Compute nodes to request.", default=1, minimum=1,
    ),
    FieldInfo(
        "hardware.cores_per_node", "Cores per node", "integer",
        "CPU cores per node.", default=16, minimum=1,
    ),
    FieldInfo(
        "hardware.memory", "Memory", "number",
        "Memory per node.", unit="GB", default=32.0, minimum=1e-9,
    ),
    FieldInfo(
        "hardware.gpus", "GPUs", "integer",
        "GPUs per node; zero requests a CPU-only allocation.",
        default=0, minimum=0,
    ),
    FieldInfo(
        "hardware.walltime", "Walltime", "number",
        "Maximum run time before the scheduler stops the job.",
        unit="hours", default=24.0, minimum=1e-9,
    ),
    FieldInfo(
        "hardware.queue", "Queue", "text",
        "Scheduler queue to submit to.", default="normal",
    ),
    FieldInfo(
        "hardware.project_code", "Project code", "text",
        "Accounting project for the scheduler; leave empty if your site does "
        "not use one.",
        default="", advanced=True,
    ),
    FieldInfo(
        "hardware.email", "Notification email", "text",
        "Address for job start/finish/abort notifications; leave empty to "
        "disable them.",
        default="", advanced=True,
    ),
    FieldInfo(
        "hardware.engine_module", "Engine module", "text",
        "Environment module that provides the MD engine (e.g. gromacs/2024.5).",
        default="gromacs/2024.5", advanced=True,
    ),
)


def field_info(name: str) -> FieldInfo | None:
    for f in FIELDS:
        if f.name == name:
            return f
    return None
