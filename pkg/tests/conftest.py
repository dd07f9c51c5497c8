"""Shared fixtures: small structures, spec documents, and trajectory builders."""

from pathlib import Path

import numpy as np
import pytest

from deckforge import (
    Atom,
    Frame,
    Structure,
    make_trajectory,
    parse_spec_text,
    write_gro,
    write_xtc_file,
)

DATA_DIR = Path(__file__).parent / "data"

GLYG1_SPEC = """\
job_name = glyg1
structure_file = glyg1.pdb
forcefield = CHARMM27
water_model = TIP3P
temperature = 295
pressure = 1.0
timestep = 2
production_duration = 10
box_type = dodecahedron
box_padding = 1.0
neutralize = yes
positive_ion = NA
negative_ion = CL
random_seed = None
hardware.email = researcher@example.edu
"""

BACKBONE_NAMES = ("N", "CA", "C", "O")


def make_structure(n_atoms: int, spacing: float = 0.15) -> Structure:
    """Deterministic n-atom chain with a 4-atom backbone repeat per residue."""
    names = ("N", "CA", "C", "O", "CB")
    atoms = []
    for i in range(n_atoms):
        atoms.append(
            Atom(
                serial=i + 1,
                name=names[i % 5],
                residue_name="GLY",
                residue_seq=i // 5 + 1,
                x=0.5 + spacing * i,
                y=1.0 + 0.02 * (i % 7),
                z=1.5 - 0.01 * (i % 3),
                chain_id="A",
                element="C",
                mass=12.011,
                hetero=False,
            )
        )
    return Structure(
        title="chain", atoms=tuple(atoms), box=[[6.0, 0, 0], [0, 6.0, 0], [0, 0, 6.0]]
    )


def make_wobble_trajectory(n_atoms: int, n_frames: int, seed: int = 7, scale: float = 0.05):
    """Random small displacements around a fixed base; reproducible by seed."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.5, 4.5, size=(n_atoms, 3))
    box = np.diag([6.0, 6.0, 6.0])
    frames = [
        Frame(
            step=i * 100,
            time_ps=float(i),
            box=box,
            positions=base + rng.normal(0.0, scale, size=(n_atoms, 3)),
        )
        for i in range(n_frames)
    ]
    return make_trajectory(frames)


@pytest.fixture
def glyg1_spec():
    return parse_spec_text(GLYG1_SPEC)


@pytest.fixture
def glyg1_spec_text():
    return GLYG1_SPEC


@pytest.fixture
def chain_structure():
    return make_structure(30)


@pytest.fixture
def analysis_folder(tmp_path):
    """Folder following the one-structure-plus-one-trajectory convention."""
    structure = make_structure(30)
    folder = tmp_path / "Analysis"
    folder.mkdir()
    (folder / "model.gro").write_text(write_gro(structure))
    base = np.array([[a.x, a.y, a.z] for a in structure.atoms])
    rng = np.random.default_rng(3)
    frames = [
        Frame(
            step=i * 100,
            time_ps=float(i),
            box=np.diag([6.0, 6.0, 6.0]),
            positions=base + rng.normal(0.0, 0.03, size=base.shape),
        )
        for i in range(12)
    ]
    write_xtc_file(make_trajectory(frames), folder / "traj.xtc", 1000.0)
    return folder
