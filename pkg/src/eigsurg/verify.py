"""Independent closed-loop validation.

Everything here is recomputed from (A, B, F) and the problem statement
alone — never from synthesis intermediates — so a passing report is genuine
evidence that the gain does what was asked.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .model import SurgicalProblem, SystemPair
from .numerics import Tolerances, as_real_matrix, eig

_DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Quantitative evidence for one closed-loop gain.

    ``eigenvalue_pairs`` holds (target, achieved, distance) triples covering
    all n eigenvalues on each side exactly once. ``passed`` is True iff the
    worst pairing distance is within match_abs and every specified-target
    residual is within the norm-scaled residual bound. ``f1_annihilation``
    and ``cond_V0`` are filled only when synthesis-stage data is available;
    they never influence ``passed``.
    """

    eigenvalue_pairs: tuple[tuple[complex, complex, float], ...]
    max_pair_distance: float
    target_residuals: tuple[float, ...]
    f1_annihilation: float | None
    cond_V0: float | None
    gain_norm: float
    passed: bool


def _imag_class(x: complex, tol: Tolerances) -> int:
    if x.imag > tol.match_abs:
        return 1
    if x.imag < -tol.match_abs:
        return -1
    return 0


def match_spectra(
    achieved, target, tol: Tolerances = _DEFAULT_TOL
) -> list[tuple[int, int, float]]:
    """Greedy minimal-distance perfect matching between two eigenvalue lists.

    Ties prefer pairs whose imaginary parts fall on the same side of the real
    axis, so conjugate pairs match conjugate pairs. Returns triples
    (achieved_index, target_index, distance) sorted by target index.
    """
    a = np.asarray(achieved, dtype=complex).reshape(-1)
    t = np.asarray(target, dtype=complex).reshape(-1)
    if a.shape != t.shape:
        raise DimensionMismatch(f"cannot match {a.size} eigenvalues against {t.size}")
    order = sorted(
        (abs(a[i] - t[j]), 0 if _imag_class(a[i], tol) == _imag_class(t[j], tol) else 1, i, j)
        for i in range(a.size)
        for j in range(t.size)
    )
    taken_a: set[int] = set()
    taken_t: set[int] = set()
    matched: list[tuple[int, int, float]] = []
    for d, _, i, j in order:
        if i in taken_a or j in taken_t:
            continue
        taken_a.add(i)
        taken_t.add(j)
        matched.append((i, j, float(d)))
        if len(matched) == a.size:
            break
    return sorted(matched, key=lambda x: x[1])


def chain_residuals(Acl, p: SurgicalProblem) -> list[float]:
    """Per-target defect norms on a closed-loop matrix, by direct substitution.

    For an eigenvector target: ||(Acl - lambda I) v||; for a generalized
    eigenvector: ||(Acl - lambda I) v - v_parent||. No eigendecomposition is
    involved, so defective closed loops are handled exactly.
    """
    M = np.atleast_2d(np.asarray(Acl))
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch(f"closed-loop matrix must be square, got {M.shape}")
    out = []
    for t in p.specified:
        defect = (M - t.eigenvalue * np.eye(n)) @ t.vector
        if t.chain_parent is not None:
            defect = defect - p.specified[t.chain_parent].vector
        out.append(float(np.linalg.norm(defect)))
    return out


def verify_closed_loop(
    s: SystemPair,
    F,
    p: SurgicalProblem,
    *,
    f1_annihilation: float | None = None,
    cond_V0: float | None = None,
) -> VerificationReport:
    """Build the full report for a gain, from (A, B, F) alone.

    Computes the closed-loop spectrum, pairs it against the requested
    eigenvalues, and measures every specified-target residual directly.
    """
    Fm = as_real_matrix(F, "F")
    if Fm.shape != (s.m, s.n):
        raise DimensionMismatch(f"F must be {s.m} x {s.n}, got {Fm.shape}")
    if s.n != p.system.n:
        raise DimensionMismatch("system and problem dimensions disagree")
    tol = p.tolerances
    Acl = s.A + s.B @ Fm
    achieved = eig(Acl)[0]
    targets = np.array(
        [t.eigenvalue for t in p.specified] + list(p.free_eigenvalues), dtype=complex
    )
    pairs = match_spectra(achieved, targets, tol)
    eigenvalue_pairs = tuple(
        (complex(targets[j]), complex(achieved[i]), d) for i, j, d in pairs
    )
    max_pair = max((d for _, _, d in pairs), default=0.0)
    residuals = chain_residuals(Acl, p)
    scale = 1.0 + np.linalg.norm(s.A) + np.linalg.norm(s.B) * np.linalg.norm(Fm)
    passed = max_pair <= tol.match_abs and all(
        x <= tol.residual_abs * scale for x in residuals
    )
    return VerificationReport(
        eigenvalue_pairs=eigenvalue_pairs,
        max_pair_distance=float(max_pair),
        target_residuals=tuple(residuals),
        f1_annihilation=f1_annihilation,
        cond_V0=cond_V0,
        gain_norm=float(np.linalg.norm(Fm)),
        passed=passed,
    )
