"""Compressed-trajectory codec: round trips, malformed input, fixture decode.

tests/data/tiny.xtc was produced by this package's writer from the closed-form
coordinates below and is decoded here both by the package and by the separate
reference decoder in xtc_reference.py, which shares no code with the module
under test.
"""

import random
import struct

import numpy as np
import pytest

from deckforge import (
    AtomCountChangedError,
    CoordinateOverflowError,
    Frame,
    Trajectory,
    TruncatedFrameError,
    XtcFormatError,
    make_trajectory,
    read_xtc,
    write_xtc,
)

from conftest import DATA_DIR, make_wobble_trajectory
from xtc_reference import read_frames as reference_read_frames

BOX = np.diag([4.0, 4.0, 4.0])


def fixture_coords():
    """The exact coordinates tests/data/tiny.xtc was written from."""
    frames = []
    for f in range(3):
        pts = []
        base = [0.0, 0.0, 0.0]
        for i in range(20):
            if i % 4 == 0:
                base = [
                    (0.35 * (i // 4) - 0.8) / 3.0 + 0.0057 * f,
                    0.22 * ((i // 4) % 3) / 7.0 + 0.0031 * f,
                    (1.1 - 0.27 * (i // 4)) / 3.0 + 0.0043 * f,
                ]
                pts.append(tuple(base))
            else:
                j = i % 4
                pts.append(
                    (
                        base[0] + 0.0123 * j,
                        base[1] - 0.0091 * j + 0.0022 * f,
                        base[2] + 0.0077 * j,
                    )
                )
        frames.append(pts)
    return frames


def test_committed_fixture_decodes_within_one_quantization_step():
    traj = read_xtc(DATA_DIR / "tiny.xtc")
    want = fixture_coords()
    assert traj.atom_count == 20
    assert len(traj) == 3
    worst = 0.0
    for frame, pts in zip(traj.frames, want):
        assert frame.precision == 1000.0
        np.testing.assert_allclose(frame.box, BOX)
        worst = max(worst, float(np.abs(frame.positions - np.array(pts)).max()))
    assert worst <= 1e-3
    # the fixture was chosen off the fixed-point grid, so a decoder that
    # echoes stored integers without scaling cannot sneak through
    assert worst > 1e-5
    assert [f.step for f in traj.frames] == [0, 100, 200]
    assert [f.time_ps for f in traj.frames] == [0.0, 2.0, 4.0]


def test_committed_fixture_matches_reference_decoder_exactly():
    data = (DATA_DIR / "tiny.xtc").read_bytes()
    ours = read_xtc(data)
    theirs = reference_read_frames(data)
    assert len(theirs) == len(ours.frames)
    for frame, (step, time_ps, box, coords, precision) in zip(ours.frames, theirs):
        assert frame.step == step
        assert frame.time_ps == time_ps
        assert frame.precision == precision
        np.testing.assert_array_equal(frame.box, np.asarray(box).reshape(3, 3))
        np.testing.assert_array_equal(frame.positions, np.asarray(coords))


@pytest.mark.parametrize("precision", [100.0, 1000.0, 10000.0])
def test_round_trip_error_is_bounded_by_the_precision(precision):
    traj = make_wobble_trajectory(50, 4, seed=int(precision))
    again = read_xtc(write_xtc(traj, precision))
    assert again.atom_count == 50
    err = np.abs(again.positions_array() - traj.positions_array()).max()
    assert err <= 1.0 / precision
    for frame in again.frames:
        assert frame.precision == precision


@pytest.mark.parametrize("natoms", [10, 12, 64, 200])
def test_reference_decoder_agrees_with_ours_on_fresh_writes(natoms):
    traj = make_wobble_trajectory(natoms, 3, seed=natoms)
    data = write_xtc(traj, 1000.0)
    ours = read_xtc(data)
    theirs = reference_read_frames(data)
    for frame, (step, time_ps, box, coords, precision) in zip(ours.frames, theirs):
        np.testing.assert_array_equal(frame.positions, np.asarray(coords))
        np.testing.assert_array_equal(frame.box, np.asarray(box).reshape(3, 3))
        assert (frame.step, frame.time_ps, frame.precision) == (step, time_ps, precision)


def test_nine_or_fewer_atoms_round_trip_exactly():
    # small frames skip quantization; the only loss is the float32 store
    traj = make_wobble_trajectory(7, 3, seed=1)
    again = read_xtc(write_xtc(traj, 1000.0))
    for before, after in zip(traj.frames, again.frames):
        np.testing.assert_array_equal(
            after.positions, before.positions.astype(np.float32).astype(np.float64)
        )
        assert after.precision == 0.0


def test_empty_trajectory_is_empty_bytes_both_ways():
    assert write_xtc(Trajectory(atom_count=0, frames=[])) == b""
    traj = read_xtc(b"")
    assert len(traj) == 0 and traj.atom_count == 0


def test_truncation_keeps_the_complete_frames():
    traj = make_wobble_trajectory(30, 3, seed=5)
    data = write_xtc(traj, 1000.0)
    with pytest.raises(TruncatedFrameError) as err:
        read_xtc(data[:-10])
    assert len(err.value.frames) == 2
    assert isinstance(err.value.offset, int)


def test_bad_magic_is_reported_at_its_byte_offset():
    traj = make_wobble_trajectory(12, 1)
    data = bytearray(write_xtc(traj, 1000.0))
    data[0] ^= 0xFF
    with pytest.raises(XtcFormatError) as err:
        read_xtc(bytes(data))
    assert err.value.offset == 0


def test_atom_count_change_between_frames_is_rejected():
    a = write_xtc(make_wobble_trajectory(10, 1, seed=2), 1000.0)
    b = write_xtc(make_wobble_trajectory(12, 1, seed=3), 1000.0)
    with pytest.raises(AtomCountChangedError):
        read_xtc(a + b)


def test_coordinate_too_large_for_the_fixed_point_range():
    traj = make_wobble_trajectory(12, 1, seed=4)
    traj.frames[0].positions[5, 1] = 1.0e7
    with pytest.raises(CoordinateOverflowError):
        write_xtc(traj, 1000.0)


def test_writer_rejects_frames_with_differing_atom_counts():
    frames = [
        make_wobble_trajectory(10, 1, seed=2).frames[0],
        make_wobble_trajectory(12, 1, seed=3).frames[0],
    ]
    broken = Trajectory(atom_count=10, frames=frames)
    with pytest.raises(AtomCountChangedError):
        write_xtc(broken, 1000.0)


def test_decoder_never_crashes_on_mutated_or_random_bytes():
    rng = random.Random(99)
    valid = write_xtc(make_wobble_trajectory(25, 2, seed=6), 1000.0)
    allowed = (XtcFormatError, TruncatedFrameError, AtomCountChangedError)
    for trial in range(400):
        if trial % 2 == 0:
            data = bytes(rng.getrandbits(8) for _ in range(rng.randrange(0, 120)))
        else:
            data = bytearray(valid)
            for _ in range(rng.randrange(1, 6)):
                data[rng.randrange(len(data))] = rng.getrandbits(8)
            data = bytes(data[: rng.randrange(1, len(data) + 1)])
        try:
            read_xtc(data)
        except allowed:
            pass


def test_header_fields_survive_a_round_trip():
    frames = [
        Frame(
            step=7,
            time_ps=12.5,
            box=np.diag([2.0, 3.0, 4.0]),
            positions=np.linspace(0.0, 1.0, 36).reshape(12, 3),
        )
    ]
    again = read_xtc(write_xtc(make_trajectory(frames), 1000.0))
    frame = again.frames[0]
    assert frame.step == 7
    assert frame.time_ps == 12.5
    np.testing.assert_allclose(frame.box, np.diag([2.0, 3.0, 4.0]), atol=1e-7)
    # the frame header stores the atom count twice; both copies must agree
    raw = write_xtc(make_trajectory(frames), 1000.0)
    magic, natoms = struct.unpack_from(">ii", raw, 0)
    (lsize,) = struct.unpack_from(">i", raw, 52)
    assert magic == 1995 and natoms == 12 and lsize == 12
