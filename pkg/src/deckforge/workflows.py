"""End-to-end helpers shared by the CLI and the local service.

The analysis folder convention: a directory holding exactly one structure
file (.pdb or .gro) and one trajectory (.xtc, or a multi-frame .gro that
doubles as its own structure).  Explicit paths override the convention.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import analysis, plots
from .errors import AtomCountMismatchError
from .structure import Structure, parse_gro, parse_pdb
from .trajectory import Trajectory, read_gro_trajectory, resolve_selection
from .xtc import read_xtc

ANALYSIS_METHODS = ("rmsd", "rmsf", "rog", "pca")


def load_structure_bytes(filename: str, data: bytes | str) -> Structure:
    if filename.lower().endswith(".gro"):
        return parse_gro(data)
    return parse_pdb(data)


def load_structure_file(path: str | Path) -> Structure:
    path = Path(path)
    return load_structure_bytes(path.name, path.read_bytes())


def load_trajectory_file(path: str | Path) -> Trajectory:
    path = Path(path)
    if path.suffix.lower() == ".xtc":
        return read_xtc(path)
    return read_gro_trajectory(path.read_text(encoding="utf-8"))


def find_analysis_inputs(
    folder: str | Path,
    structure: str | Path | None = None,
    trajectory: str | Path | None = None,
) -> tuple[Path, Path]:
    folder = Path(folder)
    structure_path = Path(structure) if structure else None
    trajectory_path = Path(trajectory) if trajectory else None

    if trajectory_path is None:
        xtcs = sorted(folder.glob("*.xtc"))
        gros = sorted(folder.glob("*.gro"))
        if len(xtcs) == 1:
            trajectory_path = xtcs[0]
        elif not xtcs and len(gros) == 1 and structure_path is None:
            # a single multi-frame GRO serves as both inputs
            trajectory_path = gros[0]
        elif len(xtcs) > 1:
            raise FileNotFoundError(
                f"{folder} holds {len(xtcs)} .xtc files; name the trajectory explicitly"
            )
        else:
            raise FileNotFoundError(f"no trajectory (.xtc) found in {folder}")

    if structure_path is None:
        candidates = sorted(folder.glob("*.pdb")) + [
            p for p in sorted(folder.glob("*.gro")) if p != trajectory_path
        ]
        if trajectory_path.suffix.lower() == ".gro" and not candidates:
            candidates = [trajectory_path]
        if len(candidates) != 1:
            raise FileNotFoundError(
                f"expected exactly one structure file in {folder}, "
                f"found {len(candidates)}; name the structure explicitly"
            )
        structure_path = candidates[0]
    return structure_path, trajectory_path


def check_methods(methods) -> list[str]:
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",")]
    cleaned = [m.lower() for m in methods if m]
    unknown = [m for m in cleaned if m not in ANALYSIS_METHODS]
    if unknown:
        raise ValueError(
            f"unknown method(s) {', '.join(unknown)}; "
            f"choose from {', '.join(ANALYSIS_METHODS)}"
        )
    if not cleaned:
        raise ValueError("at least one analysis method is required")
    return cleaned


def analyze_folder(
    folder: str | Path,
    methods="rmsd,rmsf,rog,pca",
    selection: str = "all",
    title: str = "",
    out_dir: str | Path | None = None,
    reference_frame: int = 0,
    superpose: bool = True,
    structure: str | Path | None = None,
    trajectory: str | Path | None = None,
    progress=None,
) -> dict:
    """Run the requested analyses over a folder and emit CSV/SVG outputs.

    ``progress`` is an optional callable taking a fraction in [0, 1].
    Returns a summary dict whose shape is shared by the CLI's JSON mode
    and the service's job results.
    """
    methods = check_methods(methods)
    folder = Path(folder)
    if not folder.is_dir():
        raise FileNotFoundError(f"{folder} is not a directory")
    structure_path, trajectory_path = find_analysis_inputs(folder, structure, trajectory)
    structure_obj = load_structure_file(structure_path)
    trajectory_obj = load_trajectory_file(trajectory_path)
    if len(structure_obj.atoms) != trajectory_obj.atom_count:
        raise AtomCountMismatchError(
            f"structure {structure_path.name} has {len(structure_obj.atoms)} atoms "
            f"but the trajectory holds {trajectory_obj.atom_count}"
        )

    sel = resolve_selection(structure_obj, selection)
    masses = np.array([structure_obj.atoms[i].mass for i in sel.indices])

    def tick(done: int) -> None:
        if progress is not None:
            progress(done / (len(methods) + 1))

    series = []
    pca_result = None
    tick(0)
    for i, method in enumerate(methods):
        if method == "rmsd":
            series.append(
                analysis.rmsd_series(
                    trajectory_obj,
                    sel,
                    reference_frame=reference_frame,
                    superpose=superpose,
                )
            )
        elif method == "rmsf":
            series.append(
                analysis.rmsf_series(trajectory_obj, sel, superpose_to_mean=superpose)
            )
        elif method == "rog":
            series.append(analysis.rog_series(trajectory_obj, sel, masses=masses))
        elif method == "pca":
            pca_result = analysis.pca(trajectory_obj, sel, superpose=superpose)
        tick(i + 1)

    destination = Path(out_dir) if out_dir is not None else folder
    written = plots.emit_plots(series, pca_result, title, destination)
    if progress is not None:
        progress(1.0)
    return {
        "structure": str(structure_path),
        "trajectory": str(trajectory_path),
        "frames": len(trajectory_obj.frames),
        "atoms_selected": len(sel.indices),
        "methods": methods,
        "out_dir": str(destination),
        "files": [str(p) for p in written],
    }
