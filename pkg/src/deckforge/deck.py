"""Deck rendering and the two-file reproducibility bundle.

A deck is six text files: five stage parameter files plus one scheduler job
script.  A bundle is a directory holding exactly two files, a setup shell
script and the input structure.  The setup script carries a machine-readable
manifest in its comment header (full spec, derived values, complete stage
tables) and, when executed with a POSIX shell in an empty directory, writes
the six deck files byte-for-byte as the library would render them directly.

Because the manifest records the final stage tables rather than inputs to be
re-derived, a bundle expands to the same bytes regardless of what the
built-in ledger looks like by the time it is reopened.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

from .defaults import Stage
from .errors import (
    BundleLayoutError,
    DuplicateKeyError,
    HashMismatchError,
    MalformedLineError,
    ManifestMissingError,
    ManifestVersionError,
    StructureUnreadableError,
)
from .simspec import (
    Finding,
    ResolvedSpec,
    Severity,
    SimulationSpec,
    ValidationReport,
    spec_file_items,
    spec_from_file_items,
    validate,
)

MANIFEST_VERSION = 1
_MANIFEST_BEGIN = "==DECK-MANIFEST-BEGIN=="
_MANIFEST_END = "==DECK-MANIFEST-END=="

_STAGE_HEADERS = {
    Stage.IONS: "ion placement minimization",
    Stage.EM: "energy minimization",
    Stage.NVT: "constant-volume equilibration",
    Stage.NPT: "constant-pressure equilibration",
    Stage.MD: "production run",
}


# ---------------------------------------------------------------------------
# stage parameter files


@dataclass(frozen=True)
class MdpDocument:
    stage: Stage
    entries: tuple  # of (key, value, comment)


def mdp_document(resolved: ResolvedSpec, stage: Stage) -> MdpDocument:
    return MdpDocument(stage=stage, entries=tuple(resolved.stage_table(stage)))


def render_mdp(doc: MdpDocument) -> str:
    """Render one parameter file: fixed-width keys, LF endings."""
    lines = [f"; {doc.stage.filename} - {_STAGE_HEADERS[doc.stage]}"]
    for key, value, comment in doc.entries:
        line = key.ljust(24) + "= " + value
        if comment:
            line += " ; " + comment
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_mdp(text: str) -> list[tuple[str, str, str]]:
    """Parse parameter-file text back to (key, value, comment) triples."""
    entries: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        if "=" not in line:
            raise MalformedLineError(lineno, raw)
        key, _, rest = line.partition("=")
        key = key.strip()
        if not key:
            raise MalformedLineError(lineno, raw)
        if key in seen:
            raise DuplicateKeyError(key, lineno)
        seen.add(key)
        value, sep, comment = rest.partition(" ; ")
        entries.append((key, value.strip(), comment.strip() if sep else ""))
    return entries


# ---------------------------------------------------------------------------
# scheduler job script


@dataclass(frozen=True)
class JobScript:
    directives: tuple  # of "#PBS ..." lines
    commands: tuple  # of shell command lines
    body: str  # full script text

    def render(self) -> str:
        return self.body


def _walltime(hours: float) -> str:
    total = round(hours * 3600)
    return f"{total // 3600:02d}:{total % 3600 // 60:02d}:{total % 60:02d}"


def _mem_token(memory_gb: float) -> str:
    if memory_gb == int(memory_gb):
        return f"{int(memory_gb)}gb"
    return f"{memory_gb:g}gb"


def render_pbs(resolved: ResolvedSpec, names: dict | None = None) -> JobScript:
    """Render the scheduler job script.

    ``names`` substitutes shell parameter references for the job name,
    structure file and engine module; the default uses literal values.
    ``JobScript.directives`` and ``JobScript.commands`` are the public
    accessors for counting scheduler arguments and pipeline calls.
    """
    spec = resolved.source
    hw = spec.hardware
    names = names or {}
    job = names.get("job", spec.job_name)
    structure = names.get("structure", spec.structure_filename)
    module = names.get("module", hw.engine_module)

    select = f"select={hw.nodes}:ncpus={hw.cores_per_node}:mem={_mem_token(hw.memory_gb)}"
    if hw.gpus > 0:
        select += f":ngpus={hw.gpus}"

    directives = [
        f"#PBS -N {job}",
        f"#PBS -q {hw.queue}",
        f"#PBS -l {select}",
        f"#PBS -l walltime={_walltime(hw.walltime_hours)}",
        "#PBS -j oe",
    ]
    if hw.project_code:
        directives.insert(1, f"#PBS -P {hw.project_code}")
    if hw.email:
        directives.append(f"#PBS -m abe -M {hw.email}")

    ff = _FORCEFIELD_TOKENS[spec.forcefield]
    water = _WATER_TOKENS[spec.water_model]

    prep = [
        f"module load {module}",
        "cd $PBS_O_WORKDIR",
        f"gmx pdb2gmx -f {structure} -o processed.gro -p topol.top "
        f"-ff {ff} -water {water} -ignh",
        f"gmx editconf -f processed.gro -o boxed.gro -c "
        f"-d {spec.box_padding_nm:g} -bt {spec.box_type}",
    ]
    if spec.molecule_count > 1:
        # extra copies go into the prepared box; the topology count is
        # bumped in the same step so the deck stays consistent
        prep.append(
            f"gmx insert-molecules -f boxed.gro -ci processed.gro "
            f"-nmol {spec.molecule_count - 1} -o boxed.gro && "
            f"sed -i '/^Protein/ s/[0-9][0-9]*$/{spec.molecule_count}/' topol.top"
        )
    prep.append("gmx solvate -cp boxed.gro -cs spc216.gro -o solvated.gro -p topol.top")
    if spec.neutralize:
        prep.append("gmx grompp -f ions.mdp -c solvated.gro -p topol.top -o ions.tpr -maxwarn 1")
        prep.append(
            f'echo "SOL" | gmx genion -s ions.tpr -o ionized.gro -p topol.top '
            f"-pname {spec.positive_ion} -nname {spec.negative_ion} -neutral"
        )
    else:
        # keep the downstream file name uniform when no ions are added
        prep.append("cp solvated.gro ionized.gro")

    run = [
        "gmx grompp -f em.mdp -c ionized.gro -p topol.top -o em.tpr",
        "gmx mdrun -deffnm em",
        "gmx grompp -f nvt.mdp -c em.gro -r em.gro -p topol.top -o nvt.tpr",
        "gmx mdrun -deffnm nvt",
        "gmx grompp -f npt.mdp -c nvt.gro -r nvt.gro -t nvt.cpt -p topol.top -o npt.tpr",
        "gmx mdrun -deffnm npt",
        f"gmx grompp -f md.mdp -c npt.gro -t npt.cpt -p topol.top -o {job}_md.tpr",
        f"gmx mdrun -deffnm {job}_md",
    ]
    post = [
        f'echo "System" | gmx trjconv -s {job}_md.tpr -f {job}_md.xtc '
        f"-o {job}_md_whole.xtc -pbc whole",
        f"mkdir -p analysis && cp {job}_md.gro {job}_md_whole.xtc analysis/",
    ]
    commands = prep + run + post

    lines = ["#!/bin/sh"]
    lines.extend(directives)
    lines.append("")
    lines.extend(prep[:2])
    lines.append("")
    lines.append("# system preparation")
    lines.extend(prep[2:])
    lines.append("")
    lines.append("# minimization, equilibration, production")
    lines.extend(run)
    lines.append("")
    lines.append("# post-processing for analysis")
    lines.extend(post)
    body = "\n".join(lines) + "\n"
    return JobScript(directives=tuple(directives), commands=tuple(commands), body=body)


_FORCEFIELD_TOKENS = {
    "OPLS-AA": "oplsaa",
    "AMBER99SB": "amber99sb",
    "AMBER03": "amber03",
    "CHARMM27": "charmm27",
    "GROMOS54A7": "gromos54a7",
}

_WATER_TOKENS = {
    "TIP3P": "tip3p",
    "TIP4P": "tip4p",
    "SPC": "spc",
    "SPC/E": "spce",
}


def deck_files(resolved: ResolvedSpec) -> dict[str, str]:
    """All six deck files as {filename: text}."""
    files = {}
    for stage in Stage:
        files[stage.filename] = render_mdp(mdp_document(resolved, stage))
    files[f"{resolved.source.job_name}.pbs"] = render_pbs(resolved).render()
    return files


# ---------------------------------------------------------------------------
# setup script with embedded manifest

# (stage, key) slots whose value is carried by a shell parameter in the
# setup script, with the expected derived token(s) it must still equal
_VAR_SLOTS: dict[tuple[Stage, str], tuple[str, str]] = {
    (Stage.EM, "emtol"): ("em_tolerance", "${EM_TOLERANCE}"),
    (Stage.NVT, "nsteps"): ("nsteps_nvt", "${NSTEPS_NVT}"),
    (Stage.NPT, "nsteps"): ("nsteps_npt", "${NSTEPS_NPT}"),
    (Stage.MD, "nsteps"): ("nsteps_md", "${NSTEPS_MD}"),
    (Stage.NVT, "dt"): ("dt_ps", "${TIMESTEP_PS}"),
    (Stage.NPT, "dt"): ("dt_ps", "${TIMESTEP_PS}"),
    (Stage.MD, "dt"): ("dt_ps", "${TIMESTEP_PS}"),
    (Stage.NVT, "gen_temp"): ("gen_temp", "${TEMPERATURE_K}"),
    (Stage.NVT, "gen_seed"): ("gen_seed", "${RANDOM_SEED}"),
    (Stage.MD, "ld-seed"): ("ld_seed", "${RANDOM_SEED}"),
    (Stage.NPT, "ref_p"): ("ref_p", "${PRESSURE_BAR}"),
    (Stage.MD, "ref_p"): ("ref_p", "${PRESSURE_BAR}"),
}

_PAIR_SLOTS: dict[tuple[Stage, str], tuple[str, str]] = {
    (Stage.NVT, "ref_t"): ("ref_t", "${TEMPERATURE_K} ${TEMPERATURE_K}"),
    (Stage.NPT, "ref_t"): ("ref_t", "${TEMPERATURE_K} ${TEMPERATURE_K}"),
    (Stage.MD, "ref_t"): ("ref_t", "${TEMPERATURE_K} ${TEMPERATURE_K}"),
}


def _var_table(resolved: ResolvedSpec, stage: Stage) -> MdpDocument:
    """Stage table with derived values swapped for shell parameters.

    A slot only becomes a parameter reference while its value still equals
    the derived value; user overrides stay literal so the script expands to
    exactly what direct rendering produces.
    """
    entries = []
    for key, value, comment in resolved.stage_table(stage):
        slot = _VAR_SLOTS.get((stage, key))
        if slot and value == resolved.derived[slot[0]]:
            value = slot[1]
        else:
            pair = _PAIR_SLOTS.get((stage, key))
            token = resolved.derived[pair[0]] if pair else None
            if pair and value == f"{token} {token}":
                value = pair[1]
        entries.append((key, value, comment))
    return MdpDocument(stage=stage, entries=tuple(entries))


def _manifest_lines(resolved: ResolvedSpec, structure_sha256: str | None) -> list[str]:
    lines = [_MANIFEST_BEGIN, f"manifest_version: {MANIFEST_VERSION}"]
    for key, value in spec_file_items(resolved.source):
        lines.append(f"spec.{key}: {value}")
    for name in sorted(resolved.derived):
        lines.append(f"derived.{name}: {resolved.derived[name]}")
    lines.append(f"structure.filename: {resolved.source.structure_filename}")
    if structure_sha256:
        lines.append(f"structure.sha256: {structure_sha256}")
    for stage in Stage:
        for i, (key, value, comment) in enumerate(resolved.stage_table(stage)):
            row = f"{key} = {value}"
            if comment:
                row += f" ; {comment}"
            lines.append(f"table.{stage.value}.{i}: {row}")
    lines.append(_MANIFEST_END)
    return ["# " + line for line in lines]


def render_setup_script(resolved: ResolvedSpec, structure_sha256: str | None = None) -> str:
    """Render the self-contained setup script.

    Physics values sit in a shell parameter block at the top, so a reader
    can audit or tweak the run without touching the here-documents below.
    """
    spec = resolved.source
    d = resolved.derived
    out = [
        "#!/bin/sh",
        f"# Reproducible simulation setup for job {spec.job_name}.",
        "# Run this script in the directory that holds the structure file;",
        "# it writes the five stage parameter files and the scheduler job",
        "# script, then prints the submission command.",
        "#",
    ]
    out.extend(_manifest_lines(resolved, structure_sha256))
    out.append("")
    out.append("set -e")
    out.append("")
    out.append(f'JOB_NAME="{spec.job_name}"')
    out.append(f'STRUCTURE_FILE="{spec.structure_filename}"')
    out.append(f'ENGINE_MODULE="{spec.hardware.engine_module}"')
    out.append(f'TEMPERATURE_K="{d["ref_t"]}"')
    out.append(f'PRESSURE_BAR="{d["ref_p"]}"')
    out.append(f'TIMESTEP_PS="{d["dt_ps"]}"')
    out.append(f'NSTEPS_NVT="{d["nsteps_nvt"]}"')
    out.append(f'NSTEPS_NPT="{d["nsteps_npt"]}"')
    out.append(f'NSTEPS_MD="{d["nsteps_md"]}"')
    out.append(f'RANDOM_SEED="{d["gen_seed"]}"')
    out.append(f'EM_TOLERANCE="{d["em_tolerance"]}"')

    for stage in Stage:
        doc = _var_table(resolved, stage)
        out.append("")
        out.append(f"cat > {stage.filename} << MDP_{stage.value.upper()}")
        out.append(render_mdp(doc).rstrip("\n"))
        out.append(f"MDP_{stage.value.upper()}")

    pbs = render_pbs(
        resolved,
        names={
            "job": "${JOB_NAME}",
            "structure": "${STRUCTURE_FILE}",
            "module": "${ENGINE_MODULE}",
        },
    )
    pbs_text = pbs.render().rstrip("\n").replace("$PBS_O_WORKDIR", "\\$PBS_O_WORKDIR")
    out.append("")
    out.append('cat > "${JOB_NAME}.pbs" << PBS_JOB')
    out.append(pbs_text)
    out.append("PBS_JOB")

    out.append("")
    out.append('echo "Deck written: ions.mdp em.mdp nvt.mdp npt.mdp md.mdp ${JOB_NAME}.pbs"')
    out.append('echo "Submit with: qsub ${JOB_NAME}.pbs"')
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# bundles


@dataclass(frozen=True)
class DeckBundle:
    directory: Path
    setup_path: Path
    structure_path: Path
    content_hash: str


@dataclass(frozen=True)
class Manifest:
    version: int
    spec: SimulationSpec
    derived: dict
    tables: dict  # Stage -> list[(key, value, comment)]
    structure_filename: str
    structure_sha256: str | None


def _normalize_newlines(data: bytes) -> bytes:
    return data.replace(b"\r\n", b"\n").replace(b"\r", b"\n")


def text_sha256(data: bytes | str) -> str:
    """SHA-256 of content with line endings normalized to LF."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(_normalize_newlines(data)).hexdigest()


def bundle_content_hash(setup_text: str, structure_bytes: bytes) -> str:
    digest = hashlib.sha256()
    digest.update(_normalize_newlines(setup_text.encode("utf-8")))
    digest.update(b"\n--\n")
    digest.update(_normalize_newlines(structure_bytes))
    return digest.hexdigest()


def setup_script_name(job_name: str) -> str:
    return f"{job_name}_setup.sh"


def pack_bundle(
    resolved: ResolvedSpec,
    structure: bytes | str,
    out_dir: str | Path,
) -> DeckBundle:
    """Write the two-file bundle (setup script + structure) to ``out_dir``."""
    if isinstance(structure, str):
        structure = structure.encode("utf-8")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sha = text_sha256(structure)
    setup_text = render_setup_script(resolved, structure_sha256=sha)
    setup_path = out / setup_script_name(resolved.source.job_name)
    structure_path = out / resolved.source.structure_filename
    setup_path.write_bytes(setup_text.encode("utf-8"))
    setup_path.chmod(0o755)
    structure_path.write_bytes(structure)
    return DeckBundle(
        directory=out,
        setup_path=setup_path,
        structure_path=structure_path,
        content_hash=bundle_content_hash(setup_text, structure),
    )


_MANIFEST_LINE = re.compile(r"^# (?P<key>[A-Za-z0-9_.-]+): ?(?P<value>.*)$")


def parse_manifest(setup_text: str) -> Manifest:
    """Extract and parse the manifest block from setup-script text."""
    lines = setup_text.splitlines()
    try:
        begin = lines.index("# " + _MANIFEST_BEGIN)
        end = lines.index("# " + _MANIFEST_END)
    except ValueError:
        raise ManifestMissingError("no manifest block in setup script") from None

    version: int | None = None
    spec_items: list[tuple[str, str]] = []
    derived: dict[str, str] = {}
    tables: dict[Stage, dict[int, tuple[str, str, str]]] = {s: {} for s in Stage}
    structure_filename = ""
    structure_sha256: str | None = None

    for raw in lines[begin + 1 : end]:
        m = _MANIFEST_LINE.match(raw)
        if not m:
            raise ManifestMissingError(f"unparseable manifest line: {raw!r}")
        key, value = m.group("key"), m.group("value")
        if key == "manifest_version":
            version = int(value)
        elif key.startswith("spec."):
            spec_items.append((key[len("spec."):], value))
        elif key.startswith("derived."):
            derived[key[len("derived."):]] = value
        elif key == "structure.filename":
            structure_filename = value
        elif key == "structure.sha256":
            structure_sha256 = value
        elif key.startswith("table."):
            _, stage_name, index = key.split(".", 2)
            stage = Stage(stage_name)
            entry_value, sep, comment = value.partition(" = ")[2].partition(" ; ")
            entry_key = value.partition(" = ")[0]
            tables[stage][int(index)] = (entry_key, entry_value, comment if sep else "")
        else:
            raise ManifestMissingError(f"unknown manifest key {key!r}")

    if version is None:
        raise ManifestMissingError("manifest has no version")
    if version != MANIFEST_VERSION:
        raise ManifestVersionError(str(version))

    spec = spec_from_file_items(spec_items)
    ordered_tables = {
        stage: [rows[i] for i in sorted(rows)] for stage, rows in tables.items()
    }
    return Manifest(
        version=version,
        spec=spec,
        derived=derived,
        tables=ordered_tables,
        structure_filename=structure_filename,
        structure_sha256=structure_sha256,
    )


def manifest_resolved(manifest: Manifest) -> ResolvedSpec:
    """Rebuild a resolved spec from recorded tables (no re-derivation).

    Using the recorded tables keeps expansion stable even if the built-in
    ledger changes between the pack and the reopen.
    """
    return ResolvedSpec(
        source=manifest.spec,
        tables={stage: list(rows) for stage, rows in manifest.tables.items()},
        derived=dict(manifest.derived),
        equilibration_ps=float(manifest.derived.get("equilibration_ps", 100.0)),
    )


def _bundle_paths(bundle_dir: str | Path) -> tuple[Path, Path]:
    directory = Path(bundle_dir)
    if not directory.is_dir():
        raise BundleLayoutError(f"{directory} is not a directory")
    files = sorted(p for p in directory.iterdir() if p.is_file())
    setups = [p for p in files if p.name.endswith("_setup.sh")]
    if len(setups) != 1:
        raise BundleLayoutError(
            f"expected exactly one *_setup.sh in {directory}, found {len(setups)}"
        )
    others = [p for p in files if p != setups[0]]
    if len(files) != 2:
        raise BundleLayoutError(
            f"expected exactly 2 files in {directory}, found {len(files)}"
        )
    return setups[0], others[0]


def read_bundle(bundle_dir: str | Path) -> tuple[Manifest, ResolvedSpec, Path, Path]:
    setup_path, structure_path = _bundle_paths(bundle_dir)
    manifest = parse_manifest(setup_path.read_text(encoding="utf-8"))
    if manifest.structure_filename != structure_path.name:
        raise BundleLayoutError(
            f"manifest names structure {manifest.structure_filename!r} but the "
            f"bundle holds {structure_path.name!r}"
        )
    return manifest, manifest_resolved(manifest), setup_path, structure_path


def expand_bundle(bundle_dir: str | Path, out_dir: str | Path | None = None) -> dict[str, str]:
    """Regenerate the six deck files from a bundle's manifest.

    Verifies the structure hash first; a swapped structure file would
    otherwise silently change the simulated system.  When ``out_dir`` is
    given the files are also written there.
    """
    manifest, resolved, _, structure_path = read_bundle(bundle_dir)
    try:
        structure_bytes = structure_path.read_bytes()
    except OSError as exc:
        raise StructureUnreadableError(str(exc)) from exc
    if manifest.structure_sha256:
        actual = text_sha256(structure_bytes)
        if actual != manifest.structure_sha256:
            raise HashMismatchError(structure_path.name, manifest.structure_sha256, actual)
    files = deck_files(resolved)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_bytes(text.encode("utf-8"))
    return files


def verify_bundle(bundle_dir: str | Path) -> ValidationReport:
    """Integrity report for a bundle; findings instead of exceptions."""
    findings: list[Finding] = []

    def err(fieldname: str, message: str, suggestion: str = "") -> None:
        findings.append(Finding(fieldname, Severity.ERROR, message, suggestion))

    try:
        manifest, resolved, setup_path, structure_path = read_bundle(bundle_dir)
    except (BundleLayoutError, ManifestMissingError, ManifestVersionError) as exc:
        err("bundle", str(exc))
        return ValidationReport(findings=findings)

    structure_bytes = structure_path.read_bytes()
    if manifest.structure_sha256:
        actual = text_sha256(structure_bytes)
        if actual != manifest.structure_sha256:
            err(structure_path.name,
                "structure content does not match the hash recorded at pack time")
    else:
        err(setup_path.name, "manifest records no structure hash")

    rerendered = render_setup_script(resolved, structure_sha256=manifest.structure_sha256)
    if rerendered != setup_path.read_text(encoding="utf-8"):
        err(setup_path.name,
            "setup script does not match a clean re-render from its own manifest",
            "the script body was edited after packing")

    nested = validate(manifest.spec)
    for finding in nested.findings:
        findings.append(Finding(f"spec.{finding.field}", finding.severity,
                                finding.message, finding.suggestion))

    findings.sort(key=lambda f: (f.field, f.severity.value, f.message))
    return ValidationReport(findings=findings)
