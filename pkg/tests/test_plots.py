"""CSV and SVG emission: headers, precision, layout, determinism."""

import xml.etree.ElementTree as ET

import pytest

from deckforge import (
    AnalysisSeries,
    OutputUnwritableError,
    emit_plots,
    pca,
    pca_csv,
    render_svg,
    rmsd_series,
    rmsf_series,
    rog_series,
    series_csv,
)

from conftest import make_wobble_trajectory


def small_series():
    traj = make_wobble_trajectory(10, 5, seed=21)
    return rmsd_series(traj), rmsf_series(traj), rog_series(traj)


def test_csv_headers_carry_the_axis_units():
    rmsd, rmsf_s, rog = small_series()
    assert series_csv(rmsd).splitlines()[0] == "x_ps,y_nm"
    assert series_csv(rmsf_s).splitlines()[0] == "x_atom,y_nm"
    assert series_csv(rog).splitlines()[0] == "x_ps,y_nm"


def test_csv_values_round_trip_at_full_precision():
    rmsd, _, _ = small_series()
    rows = series_csv(rmsd).splitlines()[1:]
    assert len(rows) == len(rmsd.values)
    for row, (x, y) in zip(rows, rmsd.values):
        sx, sy = row.split(",")
        # repr round-trips doubles exactly
        assert float(sx) == x
        assert float(sy) == y


def test_pca_csv_has_two_projection_columns():
    traj = make_wobble_trajectory(8, 12, seed=22)
    result = pca(traj)
    text = pca_csv(result)
    lines = text.splitlines()
    assert lines[0] == "pc1_nm,pc2_nm"
    assert len(lines) == 13
    for line, row in zip(lines[1:], result.projections):
        sx, sy = line.split(",")
        assert float(sx) == float(row[0])
        assert float(sy) == float(row[1])


def test_svg_is_well_formed_xml_with_one_panel_per_series():
    rmsd, rmsf_s, rog = small_series()
    text = render_svg([rmsd, rmsf_s, rog], title="glyg1")
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    rects = [el for el in root.iter() if el.tag.endswith("rect")]
    # one background plus one frame per panel (line panels draw no bars)
    assert len(rects) == 4
    polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
    assert len(polylines) == 3


def test_four_panels_form_a_two_by_two_grid():
    rmsd, rmsf_s, rog = small_series()
    extra = AnalysisSeries(method="RMSD", x_label="time (ps)", values=rmsd.values)
    text = render_svg([rmsd, rmsf_s, rog, extra])
    root = ET.fromstring(text)
    assert root.get("width") == "1280"
    assert root.get("height") == "960"


def test_three_panels_stay_on_one_grid_of_two_columns():
    rmsd, rmsf_s, rog = small_series()
    root = ET.fromstring(render_svg([rmsd, rmsf_s, rog]))
    assert root.get("width") == "1280"
    assert root.get("height") == "960"


def test_single_panel_svg_size():
    rmsd, _, _ = small_series()
    root = ET.fromstring(render_svg([rmsd]))
    assert root.get("width") == "640"
    assert root.get("height") == "480"


def test_pca_adds_scatter_and_scree_panels():
    traj = make_wobble_trajectory(8, 12, seed=23)
    result = pca(traj)
    text = render_svg([], pca_result=result)
    root = ET.fromstring(text)
    circles = [el for el in root.iter() if el.tag.endswith("circle")]
    assert len(circles) == 12
    bars = [
        el
        for el in root.iter()
        if el.tag.endswith("rect") and el.get("fill") == "#1f5fa8"
    ]
    assert len(bars) == min(10, len(result.eigenvalues))


def test_title_is_escaped():
    rmsd, _, _ = small_series()
    text = render_svg([rmsd], title="a <b> & c")
    assert "a &lt;b&gt; &amp; c" in text
    ET.fromstring(text)


def test_rendering_is_byte_deterministic():
    first = render_svg(list(small_series()), title="run")
    second = render_svg(list(small_series()), title="run")
    assert first == second
    assert series_csv(small_series()[0]) == series_csv(small_series()[0])


def test_empty_plot_request_is_an_error():
    with pytest.raises(ValueError):
        render_svg([])
    with pytest.raises(ValueError):
        emit_plots([], out_dir=".")


def test_emit_writes_csvs_then_svg(tmp_path):
    rmsd, rmsf_s, rog = small_series()
    traj = make_wobble_trajectory(8, 12, seed=24)
    result = pca(traj)
    written = emit_plots([rmsd, rmsf_s, rog], pca_result=result, out_dir=tmp_path)
    names = [p.name for p in written]
    assert names == ["rmsd.csv", "rmsf.csv", "rog.csv", "pca.csv", "plots.svg"]
    for path in written:
        assert path.exists() and path.stat().st_size > 0


def test_emit_is_byte_deterministic_across_directories(tmp_path):
    rmsd, _, _ = small_series()
    a = emit_plots([rmsd], out_dir=tmp_path / "a")
    b = emit_plots([rmsd], out_dir=tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_unwritable_output_directory_is_a_typed_error(tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("a file, not a directory")
    rmsd, _, _ = small_series()
    with pytest.raises(OutputUnwritableError):
        emit_plots([rmsd], out_dir=blocker)
