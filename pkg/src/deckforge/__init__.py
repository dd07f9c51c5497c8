"""Deterministic molecular-dynamics deck generation and trajectory analysis.

The pipeline in one breath: parse and validate a simulation spec, resolve
it against the stage-parameter defaults ledger, render the five stage
configuration files plus a batch job script, pack everything into a
two-file reproducible bundle, and after the (external) simulation has
run, decode the trajectory and compute RMSD / RMSF / radius of gyration /
PCA with CSV and SVG output.
"""

from .analysis import (
    AnalysisSeries,
    PcaResult,
    SuperpositionResult,
    jacobi_eigh,
    kabsch_superpose,
    pca,
    qcp_rmsd,
    radius_of_gyration,
    rmsd_series,
    rmsf,
    residue_mean,
    rmsf_series,
    rog_series,
)
from .deck import (
    DeckBundle,
    JobScript,
    Manifest,
    MdpDocument,
    bundle_content_hash,
    deck_files,
    expand_bundle,
    manifest_resolved,
    mdp_document,
    pack_bundle,
    parse_manifest,
    parse_mdp,
    read_bundle,
    render_mdp,
    render_pbs,
    render_setup_script,
    setup_script_name,
    text_sha256,
    verify_bundle,
)
from .defaults import (
    BOX_TYPES,
    FIELDS,
    FORCEFIELDS,
    WATER_MODELS,
    FieldInfo,
    Ledger,
    Stage,
    builtin_ledger,
    field_info,
    load_ledger,
)
from .errors import (
    AnalysisError,
    AtomCountChangedError,
    AtomCountMismatchError,
    BoxMissingError,
    BundleLayoutError,
    CoordinateOverflowError,
    DeckError,
    DeckforgeError,
    DegenerateGeometryError,
    DuplicateKeyError,
    EmptySelectionError,
    EmptyStructureError,
    HashMismatchError,
    InvalidSpecError,
    MalformedLineError,
    MalformedRecordError,
    ManifestMissingError,
    ManifestVersionError,
    NoConvergenceError,
    NormalizationError,
    OutputUnwritableError,
    SelectionSyntaxError,
    SelectionTooLargeError,
    SpecError,
    SpecParseError,
    StructureError,
    StructureUnreadableError,
    TooFewFramesError,
    TrajectoryError,
    TruncatedFrameError,
    UnknownStageError,
    UnresolvedOverrideError,
    XtcFormatError,
    ZeroTotalMassError,
)
from .plots import emit_plots, pca_csv, render_svg, series_csv
from .simspec import (
    Finding,
    HardwareRequest,
    ResolvedSpec,
    Severity,
    SimulationSpec,
    ValidationReport,
    normalize_value,
    parse_spec_text,
    resolve,
    serialize_spec,
    spec_as_dict,
    stage_parameters,
    validate,
    with_structure,
)
from .structure import (
    Atom,
    PrepReport,
    Structure,
    parse_gro,
    parse_pdb,
    prepare_structure,
    write_gro,
)
from .trajectory import (
    Frame,
    Selection,
    Trajectory,
    make_trajectory,
    read_gro_trajectory,
    resolve_selection,
)
from .workflows import analyze_folder
from .xtc import read_xtc, write_xtc, write_xtc_file

__version__ = "0.1.0"

__all__ = [
    "BOX_TYPES",
    "FIELDS",
    "FORCEFIELDS",
    "WATER_MODELS",
    "FieldInfo",
    "AnalysisError",
    "ZeroTotalMassError",
    "XtcFormatError",
    "UnresolvedOverrideError",
    "UnknownStageError",
    "TruncatedFrameError",
    "TooFewFramesError",
    "StructureUnreadableError",
    "SpecParseError",
    "SelectionTooLargeError",
    "SelectionSyntaxError",
    "OutputUnwritableError",
    "NormalizationError",
    "NoConvergenceError",
    "ManifestVersionError",
    "ManifestMissingError",
    "MalformedRecordError",
    "MalformedLineError",
    "HashMismatchError",
    "EmptyStructureError",
    "EmptySelectionError",
    "DuplicateKeyError",
    "DegenerateGeometryError",
    "CoordinateOverflowError",
    "BundleLayoutError",
    "BoxMissingError",
    "AtomCountMismatchError",
    "AtomCountChangedError",
    "AnalysisSeries",
    "Atom",
    "DeckBundle",
    "DeckError",
    "DeckforgeError",
    "Finding",
    "Frame",
    "HardwareRequest",
    "InvalidSpecError",
    "JobScript",
    "Ledger",
    "Manifest",
    "MdpDocument",
    "PcaResult",
    "PrepReport",
    "ResolvedSpec",
    "Selection",
    "Severity",
    "SimulationSpec",
    "SpecError",
    "Stage",
    "Structure",
    "StructureError",
    "SuperpositionResult",
    "Trajectory",
    "TrajectoryError",
    "ValidationReport",
    "analyze_folder",
    "builtin_ledger",
    "bundle_content_hash",
    "deck_files",
    "emit_plots",
    "expand_bundle",
    "field_info",
    "jacobi_eigh",
    "kabsch_superpose",
    "load_ledger",
    "make_trajectory",
    "manifest_resolved",
    "mdp_document",
    "normalize_value",
    "pack_bundle",
    "parse_gro",
    "parse_manifest",
    "parse_mdp",
    "parse_pdb",
    "parse_spec_text",
    "pca",
    "pca_csv",
    "prepare_structure",
    "qcp_rmsd",
    "radius_of_gyration",
    "read_bundle",
    "read_gro_trajectory",
    "read_xtc",
    "render_mdp",
    "render_pbs",
    "render_setup_script",
    "render_svg",
    "resolve",
    "resolve_selection",
    "rmsd_series",
    "rmsf",
    "residue_mean",
    "rmsf_series",
    "rog_series",
    "serialize_spec",
    "series_csv",
    "setup_script_name",
    "spec_as_dict",
    "stage_parameters",
    "text_sha256",
    "validate",
    "verify_bundle",
    "with_structure",
    "write_gro",
    "write_xtc",
    "write_xtc_file",
]
