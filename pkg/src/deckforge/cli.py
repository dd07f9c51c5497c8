"""Command-line interface.

Exit codes: 0 success, 1 operational failure (I/O, unreadable input,
unknown subcommand), 2 validation findings of error severity.  Results go
to stdout, diagnostics to stderr; every failure starts with one
machine-readable line `error: <Code>: <message>`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .deck import (
    expand_bundle,
    pack_bundle,
    parse_manifest,
    read_bundle,
    verify_bundle,
)
from .defaults import Ledger, builtin_ledger, load_ledger
from .errors import DeckforgeError, InvalidSpecError
from .simspec import (
    ValidationReport,
    parse_spec_text,
    resolve,
    spec_as_dict,
    validate,
    with_structure,
)
from .structure import Structure, parse_gro, parse_pdb
from .trajectory import read_gro_trajectory
from .workflows import analyze_folder, load_structure_file
from .xtc import MAGIC, read_xtc

DEFAULTS_ENV = "DECKFORGE_DEFAULTS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the contract reserves 2 for
    # validation findings, so usage problems are routed to exit 1 instead
    def error(self, message):
        raise _UsageError(message)


def _fail(code: str, message: str, detail: str = "") -> None:
    flat = " ".join(str(message).split())
    print(f"error: {code}: {flat}", file=sys.stderr)
    if detail:
        print(detail, file=sys.stderr)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=False))


def _ledger() -> Ledger:
    path = os.environ.get(DEFAULTS_ENV, "").strip()
    if not path:
        return builtin_ledger()
    return load_ledger(path)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _print_findings(report: ValidationReport, stream) -> None:
    for f in report.findings:
        line = f"{f.severity.value}: {f.field}: {f.message}"
        if f.suggestion:
            line += f" ({f.suggestion})"
        print(line, file=stream)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    spec = parse_spec_text(_read_text(args.spec))
    report = validate(spec, _ledger())
    if args.json:
        _emit_json(report.as_dict())
    else:
        _print_findings(report, sys.stdout)
        print("ok" if report.ok else f"{len(report.errors())} error(s)")
    if report.ok:
        return 0
    _fail("InvalidSpecError", f"{len(report.errors())} validation error(s)")
    return 2


def _cmd_generate(args) -> int:
    spec = parse_spec_text(_read_text(args.spec))
    structure_path = Path(args.structure)
    spec = with_structure(spec, structure_path.name)
    report = validate(spec, _ledger())
    if not report.ok:
        _fail("InvalidSpecError", f"{len(report.errors())} validation error(s)")
        _print_findings(report, sys.stderr)
        if args.json:
            _emit_json(report.as_dict())
        return 2
    structure_bytes = structure_path.read_bytes()
    # fail before writing anything if the structure does not even parse
    load_structure_file(structure_path)
    resolved = resolve(spec, _ledger())
    bundle = pack_bundle(resolved, structure_bytes, args.out)
    if args.json:
        _emit_json(
            {
                "bundle_dir": str(bundle.directory),
                "files": [bundle.setup_path.name, bundle.structure_path.name],
                "content_hash": bundle.content_hash,
            }
        )
    else:
        print(bundle.setup_path)
        print(bundle.structure_path)
        print(f"content sha256 {bundle.content_hash}")
    return 0


def _cmd_expand(args) -> int:
    out_dir = args.out if args.out else args.bundle
    files = expand_bundle(args.bundle, out_dir)
    if args.json:
        _emit_json({"out_dir": str(out_dir), "files": sorted(files)})
    else:
        for name in sorted(files):
            print(Path(out_dir) / name)
    return 0


def _cmd_verify(args) -> int:
    report = verify_bundle(args.bundle)
    if args.json:
        _emit_json(report.as_dict())
    else:
        _print_findings(report, sys.stdout)
        print("ok" if report.ok else f"{len(report.errors())} error(s)")
    if report.ok:
        return 0
    _fail("BundleVerifyError", f"{len(report.errors())} integrity error(s)")
    return 2


def _cmd_analyze(args) -> int:
    try:
        result = analyze_folder(
            args.folder,
            methods=args.methods,
            selection=args.select,
            title=args.title,
            out_dir=args.out,
            reference_frame=args.reference,
            superpose=not args.no_superpose,
            structure=args.structure,
            trajectory=args.trajectory,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if args.json:
        _emit_json(result)
    else:
        for p in result["files"]:
            print(p)
    return 0


def _summary_structure(structure: Structure, kind: str) -> dict:
    residues = {(a.chain_id, a.residue_seq) for a in structure.atoms}
    return {
        "kind": kind,
        "title": structure.title,
        "atoms": len(structure.atoms),
        "residues": len(residues),
        "water_atoms": sum(1 for a in structure.atoms if a.residue_name in
                           {"HOH", "SOL", "WAT", "TIP3", "TIP4", "T3P", "T4P"}),
        "hetero_atoms": sum(1 for a in structure.atoms if a.hetero),
        "box": structure.box is not None,
    }


def _inspect_path(path: Path) -> dict:
    if path.is_dir():
        manifest, resolved, setup_path, structure_path = read_bundle(path)
        return {
            "kind": "bundle",
            "setup_script": setup_path.name,
            "structure": structure_path.name,
            "job_name": resolved.source.job_name,
            "stages": {s.value: len(t) for s, t in resolved.tables.items()},
        }
    data = path.read_bytes()
    if len(data) >= 4 and int.from_bytes(data[:4], "big", signed=True) == MAGIC:
        traj = read_xtc(data)
        times = traj.times()
        return {
            "kind": "trajectory-xtc",
            "frames": len(traj.frames),
            "atoms": traj.atom_count,
            "time_ps": [float(times.min()), float(times.max())] if len(times) else [],
            "precision": traj.frames[0].precision if traj.frames else 0.0,
        }
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise DeckforgeError(f"unrecognized file format: {path}")
    if "==DECK-MANIFEST-BEGIN==" in text:
        manifest = parse_manifest(text)
        return {
            "kind": "setup-script",
            "manifest_version": manifest.version,
            "structure": manifest.structure_filename,
            "stages": {s: len(rows) for s, rows in manifest.tables.items()},
        }
    head = text.lstrip()[:6]
    if path.suffix.lower() == ".pdb" or head.startswith(
        ("HEADER", "TITLE", "ATOM", "HETATM", "CRYST1", "MODEL")
    ):
        return _summary_structure(parse_pdb(text), "structure-pdb")
    if path.suffix.lower() == ".gro":
        traj = read_gro_trajectory(text)
        if len(traj.frames) > 1:
            times = traj.times()
            return {
                "kind": "trajectory-gro",
                "frames": len(traj.frames),
                "atoms": traj.atom_count,
                "time_ps": [float(times.min()), float(times.max())],
            }
        return _summary_structure(parse_gro(text), "structure-gro")
    spec = parse_spec_text(text)
    report = validate(spec, _ledger())
    return {
        "kind": "spec",
        "job_name": spec.job_name,
        "errors": len(report.errors()),
        "warnings": len(report.warnings()),
        "spec": spec_as_dict(spec),
    }


def _cmd_inspect(args) -> int:
    summary = _inspect_path(Path(args.path))
    if args.json:
        _emit_json(summary)
    else:
        for key, value in summary.items():
            print(f"{key}: {value}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> _Parser:
    parser = _Parser(
        prog="deckforge",
        description=(
            "Generate reproducible molecular-dynamics simulation decks and "
            "analyze trajectories."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", help="emit one JSON document")
        return p

    p = add("validate", "check a spec file and print findings")
    p.add_argument("spec", help="spec file (key = value lines)")
    p.set_defaults(func=_cmd_validate)

    p = add("generate", "produce a two-file setup bundle from a spec")
    p.add_argument("spec", help="spec file")
    p.add_argument("--structure", required=True, help="input structure (.pdb/.gro)")
    p.add_argument("--out", required=True, help="bundle output directory")
    p.set_defaults(func=_cmd_generate)

    p = add("expand", "materialize the full deck from a bundle")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("--out", help="destination (default: the bundle directory)")
    p.set_defaults(func=_cmd_expand)

    p = add("verify", "re-check a bundle's integrity")
    p.add_argument("bundle", help="bundle directory")
    p.set_defaults(func=_cmd_verify)

    p = add("analyze", "run trajectory analyses and emit CSV/SVG plots")
    p.add_argument("folder", help="directory with one structure and one trajectory")
    p.add_argument(
        "--methods",
        default="rmsd,rmsf,rog,pca",
        help="comma list of rmsd,rmsf,rog,pca (default: all)",
    )
    p.add_argument("--select", default="all", help="atom selection expression")
    p.add_argument("--title", default="", help="plot grid title")
    p.add_argument("--out", help="output directory (default: the input folder)")
    p.add_argument("--reference", type=int, default=0, help="RMSD reference frame")
    p.add_argument(
        "--no-superpose",
        action="store_true",
        help="skip rigid-body alignment before RMSD/RMSF/PCA",
    )
    p.add_argument("--structure", help="structure file (overrides the folder scan)")
    p.add_argument("--trajectory", help="trajectory file (overrides the folder scan)")
    p.set_defaults(func=_cmd_analyze)

    p = add("inspect", "identify and summarize any supported file or bundle")
    p.add_argument("path", help="file or bundle directory")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _fail("UsageError", str(exc), parser.format_usage().rstrip())
        return 1
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        _fail("UsageError", str(exc))
        return 1
    except InvalidSpecError as exc:
        _fail("InvalidSpecError", str(exc))
        return 2
    except DeckforgeError as exc:
        _fail(type(exc).__name__, str(exc))
        return 1
    except OSError as exc:
        _fail(type(exc).__name__, str(exc))
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
