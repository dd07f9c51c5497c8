"""Deck rendering, the scheduler script, and the two-file bundle."""

import random
import shutil
import subprocess

import pytest

from deckforge import (
    BundleLayoutError,
    DuplicateKeyError,
    HashMismatchError,
    MalformedLineError,
    ManifestMissingError,
    ManifestVersionError,
    Stage,
    deck_files,
    expand_bundle,
    mdp_document,
    pack_bundle,
    parse_manifest,
    parse_mdp,
    parse_spec_text,
    render_mdp,
    render_pbs,
    render_setup_script,
    resolve,
    verify_bundle,
)

from conftest import GLYG1_SPEC

GRO_TEXT = (
    "glyg1\n"
    "    1\n"
    "    1GLY      N    1   1.000   2.000   3.000\n"
    "   5.00000   5.00000   5.00000\n"
)

EXPECTED_FILES = {"ions.mdp", "em.mdp", "nvt.mdp", "npt.mdp", "md.mdp", "glyg1.pbs"}


def spec_with(**replacements):
    """GlyG1 spec text with top-level keys replaced or appended."""
    lines = GLYG1_SPEC.splitlines()
    for key, value in replacements.items():
        key = key.replace("__", ".")
        hit = [i for i, line in enumerate(lines) if line.startswith(f"{key} ")]
        if hit:
            lines[hit[0]] = f"{key} = {value}"
        else:
            lines.append(f"{key} = {value}")
    return parse_spec_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# stage parameter files


def test_mdp_render_parse_round_trip(glyg1_spec):
    resolved = resolve(glyg1_spec)
    for stage in Stage:
        doc = mdp_document(resolved, stage)
        assert parse_mdp(render_mdp(doc)) == list(doc.entries)


def test_mdp_rendered_key_column_is_fixed_width(glyg1_spec):
    resolved = resolve(glyg1_spec)
    text = render_mdp(mdp_document(resolved, Stage.MD))
    body = [line for line in text.splitlines() if not line.startswith(";")]
    assert all(line.index("= ") == 24 for line in body)


def test_parse_mdp_rejects_duplicate_keys():
    with pytest.raises(DuplicateKeyError):
        parse_mdp("integrator = md\nintegrator = steep\n")


def test_parse_mdp_rejects_line_without_assignment():
    with pytest.raises(MalformedLineError) as err:
        parse_mdp("integrator = md\njust words\n")
    assert "2" in str(err.value)


def test_parse_mdp_skips_blanks_and_comments():
    entries = parse_mdp("; header\n\nemtol = 500 ; stop force\n")
    assert entries == [("emtol", "500", "stop force")]


def test_deck_has_exactly_six_files_with_stage_counts(glyg1_spec):
    files = deck_files(resolve(glyg1_spec))
    assert set(files) == EXPECTED_FILES
    sizes = {name: len(parse_mdp(text)) for name, text in files.items() if name.endswith(".mdp")}
    assert sizes == {
        "ions.mdp": 11,
        "em.mdp": 11,
        "nvt.mdp": 31,
        "npt.mdp": 35,
        "md.mdp": 36,
    }


def test_temperature_change_touches_only_temperature_lines(glyg1_spec):
    cold = deck_files(resolve(glyg1_spec))
    hot = deck_files(resolve(spec_with(temperature=325)))
    assert set(cold) == set(hot)
    for name in sorted(cold):
        old_lines = cold[name].splitlines()
        new_lines = hot[name].splitlines()
        assert len(old_lines) == len(new_lines)
        for old, new in zip(old_lines, new_lines):
            if old == new:
                continue
            key = old.split("=")[0].strip()
            assert key in {"ref_t", "gen_temp"}, f"unexpected diff in {name}: {old!r}"
            assert "295" in old and "325" in new


# ---------------------------------------------------------------------------
# scheduler job script


def test_pbs_directives_and_commands_for_default_hardware(glyg1_spec):
    job = render_pbs(resolve(glyg1_spec))
    # queue, name, resources, walltime, joined streams, plus the email hook
    assert len(job.directives) == 6
    assert len(job.commands) == 17
    text = job.render()
    assert text.startswith("#!/bin/sh\n#PBS -N glyg1\n")
    assert "#PBS -l select=1:ncpus=16:mem=32gb" in text
    assert "#PBS -l walltime=24:00:00" in text
    assert "#PBS -j oe" in text
    assert "#PBS -m abe -M researcher@example.edu" in text
    assert "module load gromacs/2024.5" in job.commands[0]
    assert job.commands[1] == "cd $PBS_O_WORKDIR"


def test_pbs_gpu_and_project_code_directives():
    spec = spec_with(
        hardware__gpus=2,
        hardware__project_code="ab12",
        hardware__walltime="1.5",
        hardware__memory="64.5",
    )
    job = render_pbs(resolve(spec))
    assert len(job.directives) == 7
    text = job.render()
    assert "ngpus=2" in text
    assert "#PBS -P ab12" in text
    assert "walltime=01:30:00" in text
    assert "mem=64.5gb" in text


def test_pbs_minimal_directives_without_email():
    spec = spec_with(hardware__email="")
    job = render_pbs(resolve(spec))
    assert len(job.directives) == 5


def test_pbs_skipping_neutralization_keeps_pipeline_file_names():
    job = render_pbs(resolve(spec_with(neutralize="no")))
    assert len(job.commands) == 16
    assert not any("genion" in c for c in job.commands)
    assert any(c.startswith("cp solvated.gro ionized.gro") for c in job.commands)


def test_pbs_multi_copy_systems_insert_molecules():
    job = render_pbs(resolve(spec_with(molecule_count=4)))
    assert len(job.commands) == 18
    insert = [c for c in job.commands if "insert-molecules" in c]
    assert len(insert) == 1
    assert "-nmol 3" in insert[0]


def test_pbs_counts_stay_in_band_across_randomized_hardware():
    rng = random.Random(20)
    for _ in range(40):
        spec = spec_with(
            hardware__nodes=rng.randint(1, 8),
            hardware__cores_per_node=rng.choice((8, 16, 32, 48)),
            hardware__memory=rng.choice((16, 32, 64, 128)),
            hardware__gpus=rng.randint(0, 4),
            hardware__walltime=rng.choice((0.5, 12, 24, 168)),
            hardware__queue=rng.choice(("normal", "express", "gpuq")),
            hardware__project_code=rng.choice(("", "ab12")),
            hardware__email=rng.choice(("", "a@b.c")),
            neutralize=rng.choice(("yes", "no")),
            molecule_count=rng.choice((1, 2, 5)),
        )
        job = render_pbs(resolve(spec))
        assert 5 <= len(job.directives) <= 7
        assert 16 <= len(job.commands) <= 18


# ---------------------------------------------------------------------------
# setup script and bundle


def test_setup_script_embeds_a_manifest_that_reproduces_the_spec(glyg1_spec):
    resolved = resolve(glyg1_spec)
    text = render_setup_script(resolved, structure_sha256="0" * 64)
    manifest = parse_manifest(text)
    assert manifest.version == 1
    assert manifest.spec == glyg1_spec
    assert manifest.derived == resolved.derived
    assert manifest.tables == resolved.tables
    assert manifest.structure_filename == "glyg1.pdb"
    assert manifest.structure_sha256 == "0" * 64


def test_setup_script_survives_an_advanced_override():
    text = GLYG1_SPEC.replace("temperature = 295", "temperature = 310")
    text += "\n[advanced.MD]\nnstlog = 2500\n"
    resolved = resolve(parse_spec_text(text))
    manifest = parse_manifest(render_setup_script(resolved))
    assert manifest.spec.advanced == {"md": {"nstlog": "2500"}}
    md = dict((k, v) for k, v, _ in manifest.tables[Stage.MD])
    assert md["nstlog"] == "2500"


def test_pack_writes_exactly_two_files(tmp_path, glyg1_spec):
    bundle = pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    names = sorted(p.name for p in bundle.directory.iterdir())
    assert names == ["glyg1.pdb", "glyg1_setup.sh"]
    assert bundle.setup_path.stat().st_mode & 0o111


def test_two_packs_share_one_content_hash(tmp_path, glyg1_spec):
    resolved = resolve(glyg1_spec)
    one = pack_bundle(resolved, GRO_TEXT, tmp_path / "one")
    two = pack_bundle(resolved, GRO_TEXT, tmp_path / "two")
    assert one.content_hash == two.content_hash
    assert one.setup_path.read_bytes() == two.setup_path.read_bytes()


def test_expand_matches_direct_rendering_byte_for_byte(tmp_path, glyg1_spec):
    resolved = resolve(glyg1_spec)
    pack_bundle(resolved, GRO_TEXT, tmp_path / "b")
    files = expand_bundle(tmp_path / "b", tmp_path / "out")
    direct = deck_files(resolved)
    assert files == direct
    for name, text in direct.items():
        assert (tmp_path / "out" / name).read_bytes() == text.encode()


def test_setup_script_executed_by_sh_writes_the_same_six_files(tmp_path, glyg1_spec):
    if shutil.which("sh") is None:
        pytest.skip("no POSIX shell on PATH")
    resolved = resolve(glyg1_spec)
    bundle = pack_bundle(resolved, GRO_TEXT, tmp_path / "b")
    workdir = tmp_path / "run"
    workdir.mkdir()
    script = workdir / bundle.setup_path.name
    script.write_bytes(bundle.setup_path.read_bytes())
    proc = subprocess.run(
        ["sh", script.name], cwd=workdir, capture_output=True, text=True, timeout=30
    )
    assert proc.returncode == 0, proc.stderr
    written = {p.name for p in workdir.iterdir()} - {script.name}
    assert written == EXPECTED_FILES
    direct = deck_files(resolved)
    for name in EXPECTED_FILES:
        assert (workdir / name).read_text() == direct[name], name


def test_verify_accepts_a_clean_bundle(tmp_path, glyg1_spec):
    pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    report = verify_bundle(tmp_path / "b")
    assert report.ok
    assert report.findings == []


def test_verify_and_expand_catch_a_swapped_structure(tmp_path, glyg1_spec):
    bundle = pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    bundle.structure_path.write_text(GRO_TEXT.replace("1.000", "1.001"))
    report = verify_bundle(tmp_path / "b")
    assert not report.ok
    assert any("hash" in f.message for f in report.errors())
    with pytest.raises(HashMismatchError):
        expand_bundle(tmp_path / "b")


def test_verify_catches_an_edited_setup_script(tmp_path, glyg1_spec):
    bundle = pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    text = bundle.setup_path.read_text()
    bundle.setup_path.write_text(text.replace('TEMPERATURE_K="295"', 'TEMPERATURE_K="500"'))
    report = verify_bundle(tmp_path / "b")
    assert any("re-render" in f.message for f in report.errors())


def test_bundle_layout_rejects_extra_files(tmp_path, glyg1_spec):
    pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    (tmp_path / "b" / "notes.txt").write_text("scratch")
    with pytest.raises(BundleLayoutError):
        expand_bundle(tmp_path / "b")


def test_manifest_missing_and_version_errors(tmp_path, glyg1_spec):
    bundle = pack_bundle(resolve(glyg1_spec), GRO_TEXT, tmp_path / "b")
    text = bundle.setup_path.read_text()

    with pytest.raises(ManifestMissingError):
        parse_manifest(text.replace("==DECK-MANIFEST-BEGIN==", "==GONE=="))
    with pytest.raises(ManifestVersionError):
        parse_manifest(text.replace("manifest_version: 1", "manifest_version: 99"))
