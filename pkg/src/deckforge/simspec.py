"""Simulation specification: types, validation, normalization, resolution.

A :class:`SimulationSpec` is what the user writes (a handful of physics and
bookkeeping choices plus a hardware request).  ``resolve`` combines it with
the parameter ledger into a :class:`ResolvedSpec` whose five stage tables are
the exact key/value/comment triples that deck rendering will write out.

The module also owns the plain-text spec file format::

    # GlyG1 at 295 K
    job_name = glyg1_295k
    temperature = 295
    hardware.nodes = 2

    [advanced.MD]
    nstlog = 1000
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

from . import defaults
from .defaults import Ledger, Stage, builtin_ledger
from .errors import (
    InvalidSpecError,
    NormalizationError,
    SpecParseError,
    UnknownStageError,
    UnresolvedOverrideError,
)


@dataclass(frozen=True)
class HardwareRequest:
    nodes: int = 1
    cores_per_node: int = 16
    memory_gb: float = 32.0
    gpus: int = 0
    walltime_hours: float = 24.0
    queue: str = "normal"
    project_code: str = ""
    email: str = ""
    engine_module: str = "gromacs/2024.5"


@dataclass(frozen=True)
class SimulationSpec:
    job_name: str = "mdsim"
    structure_filename: str = "protein.pdb"
    forcefield: str = "OPLS-AA"
    water_model: str = "TIP3P"
    temperature_k: float = 300.0
    pressure_bar: float = 1.0
    timestep_fs: float = 2.0
    production_ns: float = 10.0
    box_type: str = "cubic"
    box_padding_nm: float = 1.0
    neutralize: bool = True
    positive_ion: str = "NA"
    negative_ion: str = "CL"
    molecule_count: int = 1
    random_seed: int | None = None
    hardware: HardwareRequest = field(default_factory=HardwareRequest)
    # stage name (lowercase) -> mdp key -> raw value
    advanced: dict = field(default_factory=dict)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    field: str
    severity: Severity
    message: str
    suggestion: str = ""

    def as_dict(self) -> dict:
        return {
            "field": self.field,
            "severity": self.severity.value,
            "message": self.message,
            "suggestion": self.suggestion,
        }


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors()

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.WARNING]

    def as_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.as_dict() for f in self.findings]}


@dataclass(frozen=True)
class ResolvedSpec:
    source: SimulationSpec
    tables: dict  # Stage -> list[(key, value, comment)]
    derived: dict  # placeholder name -> formatted string
    equilibration_ps: float

    def stage_table(self, stage: Stage) -> list[tuple[str, str, str]]:
        return list(self.tables[stage])


# ---------------------------------------------------------------------------
# value normalization

_SEED_FIELDS = {"random_seed", "gen_seed", "ld-seed", "ld_seed", "seed"}
_ONOFF_FIELDS = {"neutralize", "gen_vel", "continuation", "morse", "pbc_scaling"}

_CHOICE_TABLES: dict[str, dict[str, str]] = {
    "tcoupl": {
        "no": "no", "off": "no", "none": "no",
        "v-rescale": "V-rescale", "vrescale": "V-rescale", "v_rescale": "V-rescale",
        "berendsen": "Berendsen",
        "nose-hoover": "Nose-Hoover", "nosehoover": "Nose-Hoover",
        "andersen": "Andersen",
    },
    "pcoupl": {
        "no": "no", "off": "no", "none": "no",
        "parrinello-rahman": "Parrinello-Rahman",
        "parrinellorahman": "Parrinello-Rahman",
        "parrinello_rahman": "Parrinello-Rahman",
        "berendsen": "Berendsen",
        "c-rescale": "C-rescale", "crescale": "C-rescale",
        "mttk": "MTTK",
    },
    "pcoupltype": {
        "isotropic": "isotropic",
        "semiisotropic": "semiisotropic",
        "anisotropic": "anisotropic",
    },
    "constraints": {
        "none": "none",
        "h-bonds": "h-bonds", "hbonds": "h-bonds", "h_bonds": "h-bonds",
        "all-bonds": "all-bonds", "allbonds": "all-bonds",
        "h-angles": "h-angles",
        "all-angles": "all-angles",
    },
    "constraint_algorithm": {"lincs": "lincs", "shake": "shake"},
    "integrator": {
        "md": "md", "md-vv": "md-vv", "steep": "steep", "cg": "cg",
        "sd": "sd", "bd": "bd", "l-bfgs": "l-bfgs",
    },
    "cutoff-scheme": {"verlet": "Verlet", "group": "group"},
    "coulombtype": {
        "pme": "PME", "cutoff": "cutoff", "cut-off": "cutoff",
        "reaction-field": "Reaction-Field", "ewald": "Ewald",
    },
    "dispcorr": {"no": "no", "enerpres": "EnerPres", "ener": "Ener"},
    "ns_type": {"grid": "grid", "simple": "simple"},
    "pbc": {"xyz": "xyz", "no": "no", "xy": "xy"},
    "refcoord_scaling": {"no": "no", "all": "all", "com": "com"},
    "box_type": {b: b for b in defaults.BOX_TYPES},
}

# canonical choices are also accepted verbatim, so normalization is idempotent
for _table in _CHOICE_TABLES.values():
    for _canon in list(_table.values()):
        _table.setdefault(_canon.lower(), _canon)

_FORCEFIELD_ALIASES = {name.lower(): name for name in defaults.FORCEFIELDS}
_FORCEFIELD_ALIASES.update({short.lower(): name for name, short in defaults.FORCEFIELDS.items()})
_WATER_ALIASES = {name.lower(): name for name in defaults.WATER_MODELS}
_WATER_ALIASES.update({short.lower(): name for name, short in defaults.WATER_MODELS.items()})

_NUMBER_FIELDS = {
    "temperature", "pressure", "timestep", "production_duration", "box_padding",
    "hardware.memory", "hardware.walltime",
    "emtol", "emstep", "dt", "tau_t", "tau_p", "ref_p", "gen_temp",
    "rcoulomb", "rvdw", "fourierspacing", "compressibility", "rlist", "rvdw-switch",
}
_INTEGER_FIELDS = {
    "molecule_count", "hardware.nodes", "hardware.cores_per_node", "hardware.gpus",
    "nsteps", "nstlist", "nstxout", "nstvout", "nstfout", "nstenergy", "nstlog",
    "nstxout-compressed", "nstcomm", "lincs_iter", "lincs_order", "pme_order",
    "nstcalcenergy",
}

# values that end up inside shell here-documents or mdp files must stay inert
_VALUE_SAFE = re.compile(r"^[A-Za-z0-9 ._+/:@,()-]*$")


def _number_token(field_name: str, text: str) -> str:
    try:
        value = float(text)
    except ValueError:
        raise NormalizationError(field_name, text, ["a number"]) from None
    if value == int(value) and "e" not in text.lower() and abs(value) < 1e15:
        # keep user-facing integers free of trailing .0
        return str(int(value)) if "." not in text else text.strip()
    return text.strip()


def normalize_value(field_name: str, value: str) -> str:
    """Map a human-entered value to its canonical engine token.

    Canonical tokens map to themselves, so the function is idempotent.
    Raises :class:`NormalizationError` (listing accepted values) when the
    input cannot be interpreted for this field.
    """
    name = field_name.strip()
    text = str(value).strip()
    lookup = name.lower()

    if lookup in _SEED_FIELDS:
        if text.lower() in ("none", ""):
            return "-1"
        try:
            return str(int(text))
        except ValueError:
            raise NormalizationError(name, text, ["none", "an integer"]) from None

    if lookup in _ONOFF_FIELDS:
        low = text.lower()
        if low in ("yes", "true", "on", "1", "y"):
            return "yes"
        if low in ("no", "false", "off", "0", "n"):
            return "no"
        raise NormalizationError(name, text, ["yes", "no"])

    if lookup == "forcefield":
        canon = _FORCEFIELD_ALIASES.get(text.lower())
        if canon is None:
            raise NormalizationError(name, text, sorted(defaults.FORCEFIELDS))
        return canon

    if lookup == "water_model":
        canon = _WATER_ALIASES.get(text.lower())
        if canon is None:
            raise NormalizationError(name, text, sorted(defaults.WATER_MODELS))
        return canon

    table = _CHOICE_TABLES.get(lookup)
    if table is not None:
        canon = table.get(text.lower())
        if canon is None:
            raise NormalizationError(name, text, sorted(set(table.values())))
        return canon

    if lookup in _NUMBER_FIELDS:
        return _number_token(name, text)
    if lookup in _INTEGER_FIELDS:
        try:
            return str(int(text))
        except ValueError:
            raise NormalizationError(name, text, ["an integer"]) from None

    # free-text fields pass through after whitespace cleanup
    return text


# ---------------------------------------------------------------------------
# validation

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]{0,63}$")
_ION_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+-]{0,5}$")
_QUEUE_RE = re.compile(r"^[A-Za-z0-9_-]{1,32}$")
_MODULE_RE = re.compile(r"^[A-Za-z0-9/._+-]{1,64}$")
_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")


def validate(spec: SimulationSpec, ledger: Ledger | None = None) -> ValidationReport:
    """Check a spec against hard rules (errors) and guidance (warnings).

    Findings come back sorted by field path so output is stable.
    """
    ledger = ledger or builtin_ledger()
    findings: list[Finding] = []

    def err(fieldname: str, message: str, suggestion: str = "") -> None:
        findings.append(Finding(fieldname, Severity.ERROR, message, suggestion))

    def warn(fieldname: str, message: str, suggestion: str = "") -> None:
        findings.append(Finding(fieldname, Severity.WARNING, message, suggestion))

    if not _NAME_RE.match(spec.job_name):
        err("job_name",
            f"{spec.job_name!r} is not a safe job name",
            "use letters, digits, hyphen or underscore, starting with a letter or digit")

    if spec.forcefield not in defaults.FORCEFIELDS:
        err("forcefield", f"unknown force field {spec.forcefield!r}",
            "one of: " + ", ".join(defaults.FORCEFIELDS))
    if spec.water_model not in defaults.WATER_MODELS:
        err("water_model", f"unknown water model {spec.water_model!r}",
            "one of: " + ", ".join(defaults.WATER_MODELS))
    if (
        spec.water_model == "TIP4P"
        and spec.forcefield in defaults.THREE_POINT_ONLY_FORCEFIELDS
    ):
        warn("water_model",
             f"{spec.forcefield} is parameterized for 3-point water; "
             "a 4-point model will likely fail at preprocessing",
             "use TIP3P, SPC or SPC/E with this force field")

    if spec.temperature_k <= 0:
        err("temperature", "temperature must be positive")
    elif not 250.0 <= spec.temperature_k <= 400.0:
        warn("temperature",
             f"{_gnum(spec.temperature_k)} K is outside the 250-400 K range "
             "typical for biomolecular systems")

    if spec.pressure_bar <= 0:
        err("pressure", "pressure must be positive")

    if spec.timestep_fs <= 0:
        err("timestep", "timestep must be positive")
    elif not 1.0 <= spec.timestep_fs <= 5.0:
        warn("timestep",
             f"{_gnum(spec.timestep_fs)} fs is outside the typical 1-5 fs range",
             "2 fs is standard with h-bond constraints")

    if spec.production_ns <= 0:
        err("production_duration", "production duration must be positive")

    if spec.box_type not in defaults.BOX_TYPES:
        err("box_type", f"unknown box type {spec.box_type!r}",
            "one of: " + ", ".join(defaults.BOX_TYPES))

    if spec.box_padding_nm < 0:
        err("box_padding", "box padding cannot be negative")
    elif spec.box_padding_nm < 0.5:
        warn("box_padding",
             f"{_gnum(spec.box_padding_nm)} nm of padding risks periodic "
             "self-interaction",
             "1.0 nm or more is usual")

    if not _ION_RE.match(spec.positive_ion):
        err("positive_ion", f"{spec.positive_ion!r} is not a valid ion name")
    if not _ION_RE.match(spec.negative_ion):
        err("negative_ion", f"{spec.negative_ion!r} is not a valid ion name")

    if spec.molecule_count < 1:
        err("molecule_count", "at least one molecule is required")

    if not spec.structure_filename or "/" in spec.structure_filename or "\\" in spec.structure_filename:
        err("structure_file", "structure filename must be a bare file name")

    hw = spec.hardware
    if hw.nodes < 1:
        err("hardware.nodes", "at least one node is required")
    if hw.cores_per_node < 1:
        err("hardware.cores_per_node", "at least one core per node is required")
    if hw.memory_gb <= 0:
        err("hardware.memory", "memory must be positive")
    if hw.gpus < 0:
        err("hardware.gpus", "GPU count cannot be negative")
    if hw.walltime_hours <= 0:
        err("hardware.walltime", "walltime must be positive")
    if not _QUEUE_RE.match(hw.queue):
        err("hardware.queue", f"{hw.queue!r} is not a valid queue name")
    if hw.project_code and not _QUEUE_RE.match(hw.project_code):
        err("hardware.project_code", f"{hw.project_code!r} is not a valid project code")
    if hw.email and not _EMAIL_RE.match(hw.email):
        err("hardware.email", f"{hw.email!r} does not look like an email address")
    if not _MODULE_RE.match(hw.engine_module):
        err("hardware.engine_module", f"{hw.engine_module!r} is not a valid module name")

    known_stages = {s.value for s in Stage}
    for stage_name, overrides in sorted(spec.advanced.items()):
        path = f"advanced.{stage_name}"
        if str(stage_name).lower() not in known_stages:
            err(path, f"unknown stage {stage_name!r}",
                "one of: " + ", ".join(s.label for s in Stage))
            continue
        for key, value in sorted(overrides.items()):
            kpath = f"{path}.{key}"
            if not _VALUE_SAFE.match(str(value)):
                err(kpath, f"value {value!r} contains characters that are not "
                           "allowed in generated files")
                continue
            try:
                normalize_value(key, str(value))
            except NormalizationError as exc:
                err(kpath, str(exc))

    findings.sort(key=lambda f: (f.field, f.severity.value, f.message))
    return ValidationReport(findings=findings)


# ---------------------------------------------------------------------------
# resolution

def _gnum(value: float) -> str:
    """Compact numeric formatting for engine files: 295.0 -> '295'."""
    return f"{value:g}"


def resolve(spec: SimulationSpec, ledger: Ledger | None = None) -> ResolvedSpec:
    """Fill the ledger's stage tables from a validated spec.

    Advanced overrides are applied last; naming a key that does not exist in
    the stage table raises :class:`UnresolvedOverrideError` rather than
    silently accepting a typo.
    """
    ledger = ledger or builtin_ledger()
    report = validate(spec, ledger)
    if not report.ok:
        raise InvalidSpecError(report.errors())

    dt_ps = spec.timestep_fs / 1000.0
    nsteps_eq = round(ledger.equilibration_ps / dt_ps)
    nsteps_md = round(spec.production_ns * 1000.0 / dt_ps)
    seed = "-1" if spec.random_seed is None else str(spec.random_seed)

    derived = {
        "ref_t": _gnum(spec.temperature_k),
        "gen_temp": _gnum(spec.temperature_k),
        "ref_p": _gnum(spec.pressure_bar),
        "dt_ps": _gnum(dt_ps),
        "nsteps_nvt": str(nsteps_eq),
        "nsteps_npt": str(nsteps_eq),
        "nsteps_md": str(nsteps_md),
        "gen_seed": seed,
        "ld_seed": seed,
        "em_tolerance": _gnum(ledger.em_tolerance),
        "equilibration_ps": _gnum(ledger.equilibration_ps),
        "production_ns": _gnum(spec.production_ns),
        "save_ps": _gnum(500 * dt_ps),
        "save_md_ps": _gnum(5000 * dt_ps),
    }

    tables: dict[Stage, list[tuple[str, str, str]]] = {}
    for stage in Stage:
        table = []
        for key, value, comment in ledger.table(stage):
            table.append((key, value.format_map(derived), comment.format_map(derived)))
        tables[stage] = table

    for stage_name, overrides in sorted(spec.advanced.items()):
        stage = Stage(str(stage_name).lower())
        table = tables[stage]
        keys = [k for k, _, _ in table]
        for key, value in sorted(overrides.items()):
            if key not in keys:
                raise UnresolvedOverrideError(stage.label, key)
            canon = normalize_value(key, str(value))
            i = keys.index(key)
            tables[stage][i] = (key, canon, "user override")

    return ResolvedSpec(
        source=spec,
        tables=tables,
        derived=derived,
        equilibration_ps=ledger.equilibration_ps,
    )


def stage_parameters(resolved: ResolvedSpec, stage: Stage | str) -> list[tuple[str, str, str]]:
    if isinstance(stage, str):
        try:
            stage = Stage(stage.lower())
        except ValueError:
            raise UnknownStageError(
                f"unknown stage {stage!r}; expected one of "
                + ", ".join(s.label for s in Stage)
            ) from None
    return resolved.stage_table(stage)


# ---------------------------------------------------------------------------
# spec file parsing and serialization

_SPEC_KEYS = {
    "job_name": str,
    "structure_file": str,
    "forcefield": "forcefield",
    "water_model": "water_model",
    "temperature": float,
    "pressure": float,
    "timestep": float,
    "production_duration": float,
    "box_type": "box_type",
    "box_padding": float,
    "neutralize": "bool",
    "positive_ion": str,
    "negative_ion": str,
    "molecule_count": int,
    "random_seed": "seed",
    "hardware.nodes": int,
    "hardware.cores_per_node": int,
    "hardware.memory": float,
    "hardware.gpus": int,
    "hardware.walltime": float,
    "hardware.queue": str,
    "hardware.project_code": str,
    "hardware.email": str,
    "hardware.engine_module": str,
}

_FIELD_FOR_KEY = {
    "job_name": "job_name",
    "structure_file": "structure_filename",
    "forcefield": "forcefield",
    "water_model": "water_model",
    "temperature": "temperature_k",
    "pressure": "pressure_bar",
    "timestep": "timestep_fs",
    "production_duration": "production_ns",
    "box_type": "box_type",
    "box_padding": "box_padding_nm",
    "neutralize": "neutralize",
    "positive_ion": "positive_ion",
    "negative_ion": "negative_ion",
    "molecule_count": "molecule_count",
    "random_seed": "random_seed",
}

_HW_FIELD_FOR_KEY = {
    "hardware.nodes": "nodes",
    "hardware.cores_per_node": "cores_per_node",
    "hardware.memory": "memory_gb",
    "hardware.gpus": "gpus",
    "hardware.walltime": "walltime_hours",
    "hardware.queue": "queue",
    "hardware.project_code": "project_code",
    "hardware.email": "email",
    "hardware.engine_module": "engine_module",
}


def _coerce(key: str, raw: str, lineno: int):
    kind = _SPEC_KEYS[key]
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind is str:
            return raw
        if kind == "bool":
            return normalize_value("neutralize", raw) == "yes"
        if kind == "seed":
            token = normalize_value("random_seed", raw)
            return None if raw.strip().lower() in ("none", "") else int(token)
        # named normalization table (forcefield, water_model, box_type)
        return normalize_value(kind, raw)
    except NormalizationError as exc:
        raise SpecParseError(lineno, str(exc)) from None
    except ValueError:
        raise SpecParseError(lineno, f"{key}: bad value {raw!r}") from None


def parse_spec_text(text: str) -> SimulationSpec:
    """Parse the plain-text spec format into a :class:`SimulationSpec`.

    Unknown keys and duplicate keys are hard errors: a silently ignored typo
    in a run parameter is worse than a failed parse.
    """
    values: dict[str, object] = {}
    hardware: dict[str, object] = {}
    advanced: dict[str, dict[str, str]] = {}
    seen: set[str] = set()
    section: str | None = None  # None = top level, else lowercase stage name

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name.lower().startswith("advanced."):
                raise SpecParseError(lineno, f"unknown section {name!r}")
            stage_name = name.split(".", 1)[1].strip().lower()
            try:
                Stage(stage_name)
            except ValueError:
                raise SpecParseError(
                    lineno,
                    f"unknown stage {name.split('.', 1)[1]!r}; expected one of "
                    + ", ".join(s.label for s in Stage),
                ) from None
            section = stage_name
            advanced.setdefault(section, {})
            continue
        if "=" not in line:
            raise SpecParseError(lineno, f"expected key = value, got {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()

        if section is not None:
            if key in advanced[section]:
                raise SpecParseError(lineno, f"duplicate key {key!r} in [advanced.{section}]")
            advanced[section][key] = raw_value
            continue

        if key not in _SPEC_KEYS:
            raise SpecParseError(lineno, f"unknown key {key!r}")
        if key in seen:
            raise SpecParseError(lineno, f"duplicate key {key!r}")
        seen.add(key)
        coerced = _coerce(key, raw_value, lineno)
        if key in _HW_FIELD_FOR_KEY:
            hardware[_HW_FIELD_FOR_KEY[key]] = coerced
        else:
            values[_FIELD_FOR_KEY[key]] = coerced

    spec = SimulationSpec(
        hardware=HardwareRequest(**hardware),
        advanced={k: dict(v) for k, v in advanced.items() if v},
        **values,
    )
    return spec


def _file_value(key: str, value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def spec_file_items(spec: SimulationSpec) -> list[tuple[str, str]]:
    """The spec as ordered (file key, file value) pairs.

    Advanced overrides appear as dotted ``advanced.<stage>.<key>`` entries.
    This is the canonical flat form used by both the text serializer and the
    bundle manifest.
    """
    hw = spec.hardware
    values = {
        "job_name": spec.job_name,
        "structure_file": spec.structure_filename,
        "forcefield": spec.forcefield,
        "water_model": spec.water_model,
        "temperature": spec.temperature_k,
        "pressure": spec.pressure_bar,
        "timestep": spec.timestep_fs,
        "production_duration": spec.production_ns,
        "box_type": spec.box_type,
        "box_padding": spec.box_padding_nm,
        "neutralize": spec.neutralize,
        "positive_ion": spec.positive_ion,
        "negative_ion": spec.negative_ion,
        "molecule_count": spec.molecule_count,
        "random_seed": spec.random_seed,
        "hardware.nodes": hw.nodes,
        "hardware.cores_per_node": hw.cores_per_node,
        "hardware.memory": hw.memory_gb,
        "hardware.gpus": hw.gpus,
        "hardware.walltime": hw.walltime_hours,
        "hardware.queue": hw.queue,
        "hardware.project_code": hw.project_code,
        "hardware.email": hw.email,
        "hardware.engine_module": hw.engine_module,
    }
    items = [(key, _file_value(key, value)) for key, value in values.items()]
    for stage_name in sorted(spec.advanced):
        for key in sorted(spec.advanced[stage_name]):
            items.append((f"advanced.{stage_name}.{key}", str(spec.advanced[stage_name][key])))
    return items


def spec_from_file_items(items: list[tuple[str, str]]) -> SimulationSpec:
    """Inverse of :func:`spec_file_items` (accepts any item order)."""
    lines = []
    sections: dict[str, list[str]] = {}
    for key, value in items:
        if key.startswith("advanced."):
            _, stage_name, mdp_key = key.split(".", 2)
            sections.setdefault(stage_name, []).append(f"{mdp_key} = {value}")
        else:
            lines.append(f"{key} = {value}")
    for stage_name in sorted(sections):
        lines.append(f"[advanced.{stage_name}]")
        lines.extend(sections[stage_name])
    return parse_spec_text("\n".join(lines) + "\n")


def serialize_spec(spec: SimulationSpec) -> str:
    """Render a spec back to the text format (full, canonical key order)."""
    lines = []
    section = None
    for key, value in spec_file_items(spec):
        if key.startswith("advanced."):
            _, stage_name, mdp_key = key.split(".", 2)
            if stage_name != section:
                section = stage_name
                lines.append("")
                lines.append(f"[advanced.{Stage(stage_name).label}]")
            lines.append(f"{mdp_key} = {value}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def spec_as_dict(spec: SimulationSpec) -> dict:
    """JSON-friendly view used by the CLI and the HTTP service."""
    d = asdict(spec)
    return d


def with_structure(spec: SimulationSpec, filename: str) -> SimulationSpec:
    return replace(spec, structure_filename=filename)
