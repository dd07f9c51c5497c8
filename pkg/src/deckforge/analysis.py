"""Trajectory analysis kernels: RMSD, RMSF, radius of gyration, PCA.

The minimized RMSD uses the quaternion characteristic polynomial: the
largest eigenvalue of the quaternion key matrix is found by Newton
iteration on its quartic characteristic polynomial, which never builds or
diagonalizes the 4x4 matrix.  A conventional rotation-matrix superposition
(SVD of the 3x3 cross-covariance) is kept alongside it, both because
aligned coordinates are needed for RMSF and PCA and because two
independent routes to the same number make regressions in either one loud.

PCA diagonalizes the coordinate covariance with a hand-rolled cyclic
Jacobi sweep.  When frames are fewer than coordinates the spectrally
identical frame-by-frame Gram matrix is diagonalized instead and its
eigenvectors are lifted back, which keeps the cost bounded by the smaller
dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryError,
    EmptySelectionError,
    NoConvergenceError,
    SelectionTooLargeError,
    TooFewFramesError,
    ZeroTotalMassError,
)
from .trajectory import Selection, Trajectory

# 3K cap for the covariance eigenproblem; sized for desk hardware
MAX_PCA_COORDINATES = 3000

_TIME_LABEL = "time (ps)"
_ATOM_LABEL = "atom index"


@dataclass(frozen=True)
class AnalysisSeries:
    """An ordered (x, y) series produced by one analysis method."""

    method: str  # "RMSD" | "RMSF" | "RoG"
    x_label: str  # axis label with units
    values: tuple  # of (x, y) pairs, y in nm

    @property
    def x_unit(self) -> str:
        """Short unit token used in CSV headers."""
        return "atom" if self.method == "RMSF" else "ps"


@dataclass(frozen=True)
class SuperpositionResult:
    rotation: np.ndarray  # (3, 3), proper rotation
    rmsd: float
    aligned: np.ndarray  # mobile coordinates after superposition


@dataclass(frozen=True)
class PcaResult:
    eigenvalues: np.ndarray  # descending, nm^2
    eigenvectors: np.ndarray  # one component per row, shape (ncomp, 3K)
    projections: np.ndarray  # (nframes, ncomp) nm
    mean: np.ndarray  # (K, 3) mean structure the frames were centered on


def _check_weights(weights, count: int) -> np.ndarray:
    if weights is None:
        return np.ones(count, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (count,):
        raise ValueError(f"expected {count} weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if w.sum() <= 0:
        raise ZeroTotalMassError("total weight is zero")
    return w


def _pair(reference, mobile) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(reference, dtype=np.float64)
    mob = np.asarray(mobile, dtype=np.float64)
    if ref.ndim != 2 or ref.shape[1] != 3 or mob.shape != ref.shape:
        raise ValueError(
            f"expected two matching (N, 3) coordinate sets, got {ref.shape} and {mob.shape}"
        )
    if ref.shape[0] < 3:
        raise DegenerateGeometryError(
            f"superposition needs at least 3 atoms, got {ref.shape[0]}"
        )
    return ref, mob


def kabsch_superpose(reference, mobile, weights=None) -> SuperpositionResult:
    """Weighted rigid-body superposition via SVD of the cross-covariance.

    The reported RMSD is evaluated directly on the aligned coordinates
    rather than through the Gram-trace identity; the identity cancels two
    nearly equal sums and loses most of its digits exactly when the answer
    is near zero, where callers care most.

    Raises :class:`DegenerateGeometryError` when the point sets are
    collinear or coincident: the optimal rotation is not unique then and
    silently returning one arbitrary choice has burned people before.
    """
    ref, mob = _pair(reference, mobile)
    w = _check_weights(weights, ref.shape[0])
    wsum = w.sum()
    ref_mean = (w[:, None] * ref).sum(axis=0) / wsum
    mob_mean = (w[:, None] * mob).sum(axis=0) / wsum
    ref_c = ref - ref_mean
    mob_c = mob - mob_mean

    cross = (mob_c * w[:, None]).T @ ref_c
    u, s, vt = np.linalg.svd(cross)
    if s[0] <= 0 or s[1] <= s[0] * 1e-12:
        raise DegenerateGeometryError(
            "point set is collinear or coincident; rotation is not unique"
        )
    d = 1.0 if np.linalg.det(u) * np.linalg.det(vt) > 0 else -1.0
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T

    aligned = mob_c @ rotation.T + ref_mean
    diff = aligned - ref
    rmsd = math.sqrt(float((w[:, None] * diff * diff).sum()) / wsum)
    return SuperpositionResult(rotation=rotation, rmsd=rmsd, aligned=aligned)


def qcp_rmsd(reference, mobile, weights=None, max_iterations: int = 50) -> float:
    """Minimized RMSD from the quaternion characteristic polynomial.

    Newton iteration starts at the upper bound (GA+GB)/2 and walks down to
    the largest root; it normally lands within a handful of steps.

    Every intermediate is carried in extended precision (long double).
    rmsd^2 falls out as the difference of two nearly equal sums, so near
    zero the double-precision route keeps only about half its digits;
    extended precision buys those digits back without a second code path.
    """
    ref64, mob64 = _pair(reference, mobile)
    w = _check_weights(weights, ref64.shape[0]).astype(np.longdouble)
    ref = ref64.astype(np.longdouble)
    mob = mob64.astype(np.longdouble)
    wsum = w.sum()
    ref_c = ref - (w[:, None] * ref).sum(axis=0) / wsum
    mob_c = mob - (w[:, None] * mob).sum(axis=0) / wsum

    ga = (w[:, None] * mob_c * mob_c).sum()
    gb = (w[:, None] * ref_c * ref_c).sum()
    if ga <= 0.0 or gb <= 0.0:
        raise DegenerateGeometryError("all atoms coincide; RMSD is undefined")

    m = (mob_c * w[:, None]).T @ ref_c
    sxx, sxy, sxz = m[0]
    syx, syy, syz = m[1]
    szx, szy, szz = m[2]

    sxx2, syy2, szz2 = sxx * sxx, syy * syy, szz * szz
    sxy2, syz2, sxz2 = sxy * sxy, syz * syz, sxz * sxz
    syx2, szy2, szx2 = syx * syx, szy * szy, szx * szx

    syz_szy_m_syy_szz2 = 2.0 * (syz * szy - syy * szz)
    sxx2_syy2_szz2_syz2_szy2 = syy2 + szz2 - sxx2 + syz2 + szy2

    c2 = -2.0 * (sxx2 + syy2 + szz2 + sxy2 + syx2 + sxz2 + szx2 + syz2 + szy2)
    c1 = 8.0 * (sxx * syz * szy + syy * szx * sxz + szz * sxy * syx
                - sxx * syy * szz - syz * szx * sxy - szy * syx * sxz)

    sxzpszx = sxz + szx
    syzpszy = syz + szy
    sxypsyx = sxy + syx
    syzmszy = syz - szy
    sxzmszx = sxz - szx
    sxymsyx = sxy - syx
    sxxpsyy = sxx + syy
    sxxmsyy = sxx - syy
    sxy2_sxz2_syx2_szx2 = sxy2 + sxz2 - syx2 - szx2

    c0 = (
        sxy2_sxz2_syx2_szx2 * sxy2_sxz2_syx2_szx2
        + (sxx2_syy2_szz2_syz2_szy2 + syz_szy_m_syy_szz2)
        * (sxx2_syy2_szz2_syz2_szy2 - syz_szy_m_syy_szz2)
        + (-sxzpszx * syzmszy + sxymsyx * (sxxmsyy - szz))
        * (-sxzmszx * syzpszy + sxymsyx * (sxxmsyy + szz))
        + (-sxzpszx * syzpszy - sxypsyx * (sxxpsyy - szz))
        * (-sxzmszx * syzmszy - sxypsyx * (sxxpsyy + szz))
        + (sxypsyx * syzpszy + sxzpszx * (sxxmsyy + szz))
        * (-sxymsyx * syzmszy + sxzpszx * (sxxpsyy + szz))
        + (sxypsyx * syzmszy + sxzmszx * (sxxmsyy - szz))
        * (-sxymsyx * syzpszy + sxzmszx * (sxxpsyy - szz))
    )

    e0 = (ga + gb) / 2.0
    lam = e0
    converged = False
    for _ in range(max_iterations):
        old = lam
        x2 = lam * lam
        b = (x2 + c2) * lam
        a = b + c1
        denom = 2.0 * x2 * lam + b + a
        if denom == 0.0:
            break
        lam -= (a * lam + c0) / denom
        if abs(lam - old) < abs(1e-11 * lam):
            converged = True
            break
    if not converged:
        raise NoConvergenceError(
            f"eigenvalue iteration did not settle in {max_iterations} steps"
        )
    return float(np.sqrt(max(np.longdouble(0.0), 2.0 * (e0 - lam) / wsum)))


# ---------------------------------------------------------------------------
# per-trajectory analyses


def _selected(trajectory: Trajectory, selection: Selection | None) -> np.ndarray:
    if len(trajectory.frames) == 0:
        raise TooFewFramesError("trajectory has no frames")
    coords = trajectory.positions_array()
    if selection is None:
        return coords
    if len(selection.indices) == 0:
        raise EmptySelectionError(
            f"selection {selection.expression!r} matches no atoms"
        )
    idx = np.asarray(selection.indices, dtype=np.intp)
    if idx.min() < 0 or idx.max() >= coords.shape[1]:
        raise IndexError("selection index out of range for this trajectory")
    return coords[:, idx, :]


def rmsd_series(
    trajectory: Trajectory,
    selection: Selection | None = None,
    reference_frame: int = 0,
    superpose: bool = True,
    weights=None,
) -> AnalysisSeries:
    """RMSD of every frame against a reference frame.

    With ``superpose`` the rotationally minimized value is reported;
    without it the displacement is measured in the lab frame exactly as
    given.  The reference frame compared against itself is zero by
    definition and is reported as exactly that.
    """
    coords = _selected(trajectory, selection)
    nframes = coords.shape[0]
    if not -nframes <= reference_frame < nframes:
        raise IndexError(f"reference frame {reference_frame} out of range")
    reference_frame %= nframes
    ref = coords[reference_frame]
    w = _check_weights(weights, coords.shape[1])
    wsum = w.sum()
    times = trajectory.times()

    values = []
    for f in range(nframes):
        if f == reference_frame:
            y = 0.0
        elif superpose:
            y = qcp_rmsd(ref, coords[f], weights=w)
        else:
            diff = coords[f] - ref
            y = math.sqrt(float((w[:, None] * diff * diff).sum()) / wsum)
        values.append((float(times[f]), float(y)))
    return AnalysisSeries(method="RMSD", x_label=_TIME_LABEL, values=tuple(values))


def superpose_frames(coords: np.ndarray, reference: np.ndarray, weights=None) -> np.ndarray:
    """Align every frame of (F, K, 3) onto a reference (K, 3)."""
    out = np.empty_like(coords)
    for f in range(coords.shape[0]):
        out[f] = kabsch_superpose(reference, coords[f], weights=weights).aligned
    return out


def rmsf(
    trajectory: Trajectory,
    selection: Selection | None = None,
    superpose_to_mean: bool = True,
    weights=None,
) -> np.ndarray:
    """Per-atom root-mean-square fluctuation about the time-averaged position.

    Fluctuations accumulate in one streaming pass (running mean and squared
    deviation per coordinate), so memory stays flat however long the
    trajectory is.  Without superposition, an identical-frames trajectory
    yields exactly zero.
    """
    coords = _selected(trajectory, selection)
    if coords.shape[0] < 2:
        raise TooFewFramesError("fluctuations need at least 2 frames")
    if superpose_to_mean:
        reference = coords.mean(axis=0)
        coords = superpose_frames(coords, reference, weights=weights)

    mean = np.zeros_like(coords[0])
    m2 = np.zeros_like(coords[0])
    count = 0
    for frame in coords:
        count += 1
        delta = frame - mean
        mean += delta / count
        m2 += delta * (frame - mean)
    variance = m2 / count
    return np.sqrt(variance.sum(axis=1))


def rmsf_series(
    trajectory: Trajectory,
    selection: Selection | None = None,
    superpose_to_mean: bool = True,
    weights=None,
) -> AnalysisSeries:
    values = rmsf(trajectory, selection, superpose_to_mean, weights)
    pairs = tuple((float(i + 1), float(v)) for i, v in enumerate(values))
    return AnalysisSeries(method="RMSF", x_label=_ATOM_LABEL, values=pairs)


def residue_mean(values, residue_ids) -> list[tuple[int, float]]:
    """Average per-atom values over residues, preserving first-seen order.

    Pairs per-atom fluctuation output with residue numbering so a per-residue
    profile can be plotted instead of the per-atom one.
    """
    vals = np.asarray(values, dtype=np.float64)
    ids = list(residue_ids)
    if vals.ndim != 1 or len(ids) != vals.shape[0]:
        raise ValueError("values and residue_ids must have equal length")
    order: list[int] = []
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for rid, v in zip(ids, vals):
        key = int(rid)
        if key not in sums:
            order.append(key)
            sums[key] = 0.0
            counts[key] = 0
        sums[key] += float(v)
        counts[key] += 1
    return [(rid, sums[rid] / counts[rid]) for rid in order]


def radius_of_gyration(positions, masses=None, mass_weighted: bool = True) -> float:
    """Radius of gyration of one coordinate set (nm).

    Mass weights apply when given and enabled; otherwise every atom counts
    equally.
    """
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] == 0:
        raise ValueError(f"expected an (N, 3) coordinate set, got {pos.shape}")
    if masses is None or not mass_weighted:
        m = np.ones(pos.shape[0], dtype=np.float64)
    else:
        m = np.asarray(masses, dtype=np.float64)
        if m.shape != (pos.shape[0],):
            raise ValueError(f"expected {pos.shape[0]} masses, got shape {m.shape}")
        if np.any(m < 0):
            raise ValueError("masses must be non-negative")
    total = m.sum()
    if total <= 0:
        raise ZeroTotalMassError("total mass is zero; cannot weight the centre")
    com = (m[:, None] * pos).sum(axis=0) / total
    rel = pos - com
    return math.sqrt(float((m * (rel * rel).sum(axis=1)).sum() / total))


def rog_series(
    trajectory: Trajectory,
    selection: Selection | None = None,
    masses=None,
    mass_weighted: bool = True,
) -> AnalysisSeries:
    """Radius of gyration over time; masses align with the selection."""
    coords = _selected(trajectory, selection)
    times = trajectory.times()
    values = tuple(
        (
            float(times[f]),
            radius_of_gyration(coords[f], masses=masses, mass_weighted=mass_weighted),
        )
        for f in range(coords.shape[0])
    )
    return AnalysisSeries(method="RoG", x_label=_TIME_LABEL, values=values)


# ---------------------------------------------------------------------------
# principal component analysis


def jacobi_eigh(matrix, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away off-diagonal mass until its norm falls below ``tol``
    relative to the initial Frobenius norm.  Rotations below the
    per-element threshold are skipped; a sweep that rotates nothing proves
    the target is met.  Returns (eigenvalues, eigenvectors-as-columns),
    unsorted.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-10 * max(1.0, float(np.abs(a).max()))):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), v

    fro = math.sqrt(float((a * a).sum()))
    if fro == 0.0:
        return np.zeros(n), v
    target = tol * fro
    thresh = target / math.sqrt(n * (n - 1))

    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float((a * a).sum() - (np.diag(a) ** 2).sum())))
        if off <= target:
            return np.diag(a).copy(), v
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            # every remaining element is under the threshold, which bounds
            # the off-diagonal norm by the target
            return np.diag(a).copy(), v
    raise NoConvergenceError(f"rotations did not converge in {max_sweeps} sweeps")


def pca(
    trajectory: Trajectory,
    selection: Selection | None = None,
    superpose: bool = True,
) -> PcaResult:
    """Principal components of Cartesian coordinate fluctuations.

    Components are reported in nm (projections) and nm^2 (eigenvalues),
    descending.  At most min(3K, nframes) components are returned; with
    fewer frames than coordinates the remaining eigenvalues are exact
    zeros and carry no directions worth reporting.
    """
    coords = _selected(trajectory, selection)
    nframes, natoms = coords.shape[0], coords.shape[1]
    if nframes < 2:
        raise TooFewFramesError("covariance needs at least 2 frames")
    if natoms * 3 > MAX_PCA_COORDINATES:
        raise SelectionTooLargeError(
            f"selection spans {natoms * 3} coordinates; "
            f"the covariance eigenproblem is capped at {MAX_PCA_COORDINATES}"
        )

    if superpose:
        # align, update the mean, and align once more so the reference is
        # itself expressed in the aligned ensemble
        for _ in range(2):
            reference = coords.mean(axis=0)
            coords = superpose_frames(coords, reference)
    mean = coords.mean(axis=0)

    flat = (coords - mean).reshape(nframes, natoms * 3)
    dim = natoms * 3

    if dim <= nframes:
        cov = (flat.T @ flat) / nframes
        evals, evecs = jacobi_eigh(cov)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        vectors = evecs[:, order].T
    else:
        gram = (flat @ flat.T) / nframes
        gvals, gvecs = jacobi_eigh(gram)
        order = np.argsort(gvals)[::-1]
        gvals = gvals[order]
        gvecs = gvecs[:, order]
        cutoff = max(float(gvals[0]), 0.0) * 1e-12
        keep = [i for i in range(nframes) if gvals[i] > cutoff]
        vectors = np.empty((len(keep), dim))
        evals = np.empty(len(keep))
        for row, i in enumerate(keep):
            lifted = flat.T @ gvecs[:, i]
            vectors[row] = lifted / math.sqrt(gvals[i] * nframes)
            evals[row] = gvals[i]

    evals = np.where((evals < 0) & (evals > -1e-10), 0.0, evals)
    projections = flat @ vectors.T
    return PcaResult(
        eigenvalues=evals,
        eigenvectors=vectors,
        projections=projections,
        mean=mean,
    )
