"""Trajectory containers, selection grammar, and concatenated GRO reading."""

import dataclasses
import logging

import numpy as np
import pytest

from deckforge import (
    AtomCountChangedError,
    EmptyStructureError,
    SelectionSyntaxError,
    make_trajectory,
    parse_gro,
    read_gro_trajectory,
    resolve_selection,
    write_gro,
)

from conftest import make_structure, make_wobble_trajectory


def frame_text(structure, time_ps, step):
    text = write_gro(structure)
    title, rest = text.split("\n", 1)
    return f"{title} t= {time_ps} step= {step}\n{rest}"


def test_two_frame_gro_concatenation(chain_structure):
    text = frame_text(chain_structure, 0.0, 0) + frame_text(chain_structure, 10.0, 5000)
    traj = read_gro_trajectory(text)
    assert len(traj) == 2
    assert traj.atom_count == 30
    assert traj.times().tolist() == [0.0, 10.0]
    assert [f.step for f in traj.frames] == [0, 5000]


def test_single_frame_matches_structure_parse(chain_structure):
    text = write_gro(chain_structure)
    traj = read_gro_trajectory(text)
    structure = parse_gro(text)
    expected = np.array([[a.x, a.y, a.z] for a in structure.atoms])
    np.testing.assert_array_equal(traj.frames[0].positions, expected)
    np.testing.assert_array_equal(traj.frames[0].box, np.asarray(structure.box))


def test_frame_atom_count_must_not_change(chain_structure):
    text = frame_text(chain_structure, 0.0, 0) + frame_text(make_structure(10), 1.0, 1)
    with pytest.raises(AtomCountChangedError):
        read_gro_trajectory(text)


def test_decreasing_times_warn_but_load(chain_structure, caplog):
    text = frame_text(chain_structure, 5.0, 0) + frame_text(chain_structure, 1.0, 1)
    with caplog.at_level(logging.WARNING):
        traj = read_gro_trajectory(text)
    assert len(traj) == 2
    assert any("earlier than previous" in r.message for r in caplog.records)


def test_untimed_frames_fall_back_to_frame_index(chain_structure):
    text = write_gro(chain_structure) * 3
    traj = read_gro_trajectory(text)
    assert traj.times().tolist() == [0.0, 1.0, 2.0]


def test_empty_text_is_an_error():
    with pytest.raises(EmptyStructureError):
        read_gro_trajectory("")


def test_trajectory_array_helpers():
    traj = make_wobble_trajectory(8, 5)
    assert traj.positions_array().shape == (5, 8, 3)
    assert traj.times().tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert len(traj) == 5


def test_make_trajectory_enforces_constant_count():
    a = make_wobble_trajectory(8, 1).frames[0]
    b = make_wobble_trajectory(9, 1).frames[0]
    with pytest.raises(AtomCountChangedError):
        make_trajectory([a, b])


# ---------------------------------------------------------------------------
# selections


def test_select_all(chain_structure):
    sel = resolve_selection(chain_structure, "all")
    assert sel.indices == tuple(range(30))


def test_select_backbone_names_only(chain_structure):
    sel = resolve_selection(chain_structure, "backbone")
    names = {chain_structure.atoms[i].name for i in sel.indices}
    assert names == {"N", "CA", "C", "O"}
    # 5-atom repeat with one sidechain atom per residue
    assert len(sel) == 24


def test_backbone_excludes_hetero_atoms(chain_structure):
    atoms = list(chain_structure.atoms)
    atoms[1] = dataclasses.replace(atoms[1], hetero=True)
    marked = dataclasses.replace(chain_structure, atoms=atoms)
    sel = resolve_selection(marked, "backbone")
    assert 1 not in sel.indices
    # a name selection still sees it; hetero only matters for backbone
    assert 1 in resolve_selection(marked, "name CA").indices


def test_select_name_list_is_case_insensitive(chain_structure):
    sel = resolve_selection(chain_structure, "name ca, cb")
    names = {chain_structure.atoms[i].name for i in sel.indices}
    assert names == {"CA", "CB"}
    assert len(sel) == 12


def test_select_residue_range_is_inclusive(chain_structure):
    sel = resolve_selection(chain_structure, "resid 2-3")
    seqs = {chain_structure.atoms[i].residue_seq for i in sel.indices}
    assert seqs == {2, 3}
    assert len(sel) == 10


def test_selection_indices_are_strictly_increasing_and_in_range(chain_structure):
    for expr in ("all", "backbone", "name CA,CB", "resid 1-6"):
        sel = resolve_selection(chain_structure, expr)
        assert list(sel.indices) == sorted(set(sel.indices))
        assert all(0 <= i < 30 for i in sel.indices)


def test_reversed_residue_range_is_a_syntax_error(chain_structure):
    with pytest.raises(SelectionSyntaxError):
        resolve_selection(chain_structure, "resid 5-3")


@pytest.mark.parametrize("expr", ["", "names CA", "resid x-y", "name", "backbones"])
def test_malformed_selections_are_syntax_errors(chain_structure, expr):
    with pytest.raises(SelectionSyntaxError):
        resolve_selection(chain_structure, expr)


def test_matching_nothing_is_legal_but_logged(chain_structure, caplog):
    with caplog.at_level(logging.WARNING):
        sel = resolve_selection(chain_structure, "name ZZ")
    assert sel.indices == ()
    assert any("matches no atoms" in r.message for r in caplog.records)


def test_selection_whitespace_is_normalized(chain_structure):
    a = resolve_selection(chain_structure, "  name   CA ,  CB  ")
    b = resolve_selection(chain_structure, "name CA,CB")
    assert a.indices == b.indices
