"""Two-stage feedback gain construction.

Stage 0 pins the specified eigenstructure by solving the realified structure
equation F0 V = Z. Completing the specified span with an orthonormal basis
and transforming A + B F0 reduces what is left to an (n-r)-dimensional
placement problem, solved by null-space eigenvector selection with Jordan
chain extensions. Stage 1 lifts the reduced gain back through the left
basis rows, which leaves the pinned structure untouched.
"""

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EigsurgError,
    InvarianceViolated,
    NotControllable,
    ProblemInvalid,
    SelectionFailed,
)
from .model import (
    InputDirections,
    SurgicalProblem,
    SystemPair,
    check_controllability,
    compute_input_directions,
    conjugate_pairing,
    realify_columns,
    validate_structure,
)
from .numerics import (
    Tolerances,
    condition_number,
    eig,
    invert,
    min_norm_right_solve,
    min_norm_solve,
    nullspace_basis,
    orthonormal_completion,
    rank,
)
from .verify import VerificationReport, match_spectra, verify_closed_loop

_DEFAULT_TOL = Tolerances()
_RETRY_BUDGET = 16


@dataclass(frozen=True, eq=False)
class Stage0Result:
    """Gain pinning the specified structure, with its realified basis."""

    F0: np.ndarray
    V01: np.ndarray
    closed0: np.ndarray


@dataclass(frozen=True, eq=False)
class InvariantDecomposition:
    """Similarity transform of A + B F0 over V0 = [V01 | V02].

    The leading r columns span the specified invariant subspace, so the
    transformed matrix is block upper triangular; B2 = W02 B is the input
    matrix seen by the unassigned block.
    """

    V0: np.ndarray
    W0: np.ndarray
    Lambda011: np.ndarray
    Lambda012: np.ndarray
    Lambda022: np.ndarray
    B2: np.ndarray

    @property
    def r(self) -> int:
        return self.Lambda011.shape[0]

    @property
    def V01(self) -> np.ndarray:
        return self.V0[:, : self.r]

    @property
    def V02(self) -> np.ndarray:
        return self.V0[:, self.r :]

    @property
    def W01(self) -> np.ndarray:
        return self.W0[: self.r, :]

    @property
    def W02(self) -> np.ndarray:
        return self.W0[self.r :, :]


@dataclass(frozen=True, eq=False)
class GainResult:
    """Everything synthesize produces, including the verification report."""

    F0: np.ndarray
    F1: np.ndarray
    F: np.ndarray
    D: np.ndarray
    decomposition: InvariantDecomposition
    report: VerificationReport


def stage0(p: SurgicalProblem, z: InputDirections) -> Stage0Result:
    """Minimum-norm real gain solving F0 V = Z over realified columns.

    The closed loop A + B F0 then carries every specified eigenvalue with its
    specified (generalized) eigenvector; the unassigned part of the spectrum
    is whatever the minimum-norm solution happens to produce.
    """
    sys_ = p.system
    tol = p.tolerances
    n, m, r = sys_.n, sys_.m, p.r
    if len(z.z) != r:
        raise DimensionMismatch(f"{len(z.z)} input directions for {r} targets")
    if r == 0:
        return Stage0Result(np.zeros((m, n)), np.zeros((n, 0)), sys_.A.copy())
    pairing = conjugate_pairing(p.specified, tol)
    Vc = p.target_matrix
    Zc = np.column_stack([np.asarray(zi, dtype=complex).reshape(m) for zi in z.z])
    V01 = realify_columns(Vc, pairing, tol)
    Z01 = realify_columns(Zc, pairing, tol)
    F0 = min_norm_right_solve(V01, Z01, tol)
    return Stage0Result(F0, V01, sys_.A + sys_.B @ F0)


def decompose(
    s0: Stage0Result, s: SystemPair, tol: Tolerances = _DEFAULT_TOL
) -> InvariantDecomposition:
    """Complete V01 orthonormally and read off the transformed blocks.

    Any basis completion works here because W02 V01 = 0 holds for the inverse
    of every [V01 | V02]; an orthonormal complement keeps V0 as well
    conditioned as the specified vectors allow. The lower-left block of
    W0 (A + B F0) V0 must vanish; if it does not, stage 0 failed to make the
    specified span invariant and the input data is inconsistent.
    """
    n = s.n
    r = s0.V01.shape[1]
    if s0.closed0.shape != (n, n):
        raise DimensionMismatch(f"closed-loop matrix must be {n} x {n}")
    if r == n:
        V0 = s0.V01
    else:
        V0 = np.column_stack([s0.V01, orthonormal_completion(s0.V01, tol)])
    W0 = invert(V0, tol)
    T = W0 @ s0.closed0 @ V0
    lower_left = T[r:, :r]
    if lower_left.size and np.linalg.norm(lower_left) > tol.residual_abs * (
        1.0 + np.linalg.norm(s0.closed0)
    ):
        raise InvarianceViolated(
            "specified span is not invariant under A + B F0 "
            f"(block norm {np.linalg.norm(lower_left):.3e})"
        )
    return InvariantDecomposition(
        V0=V0,
        W0=W0,
        Lambda011=T[:r, :r],
        Lambda012=T[:r, r:],
        Lambda022=T[r:, r:],
        B2=W0[r:, :] @ s.B,
    )


def _group_self_conjugate(targets, match_abs: float):
    """Cluster a self-conjugate multiset into (value, multiplicity, is_complex)
    groups, one group per conjugate pair (represented by the positive member)."""
    vals = [complex(t) for t in targets]
    canon = [complex(v.real, 0.0) if abs(v.imag) <= match_abs else v for v in vals]
    remaining = list(range(len(vals)))
    groups: list[tuple[complex, int, bool]] = []
    while remaining:
        mu = canon[remaining[0]]
        members = [j for j in remaining if abs(canon[j] - mu) <= match_abs]
        for j in members:
            remaining.remove(j)
        if mu.imag == 0.0:
            groups.append((mu.real, len(members), False))
            continue
        mates = [j for j in remaining if abs(canon[j] - mu.conjugate()) <= match_abs]
        if len(mates) != len(members):
            raise ValueError("target eigenvalue multiset is not self-conjugate")
        for j in mates:
            remaining.remove(j)
        groups.append((mu if mu.imag > 0 else mu.conjugate(), len(members), True))
    return groups


def _random_unit(rng, d: int, is_complex: bool):
    q = rng.standard_normal(d)
    if is_complex:
        q = q + 1j * rng.standard_normal(d)
    return q / np.linalg.norm(q)


def _select_heads(N, s, want, tol, rng, is_complex):
    """Pick up to `want` null-space vectors with independent state parts.

    First pass (rng None) walks the orthonormal basis columns in order;
    retries draw random unit combinations of them.
    """
    d = N.shape[1]
    if rng is None:
        candidates = [N[:, j] for j in range(d)]
    else:
        candidates = [N @ _random_unit(rng, d, is_complex) for _ in range(d + want)]
    heads = []
    basis = np.zeros((s, 0), dtype=N.dtype)
    for cand in candidates:
        u = cand[:s]
        if np.linalg.norm(u) < 1e-12:
            continue
        trial = np.column_stack([basis, u])
        if rank(trial, tol) > basis.shape[1]:
            heads.append(cand)
            basis = trial
        if len(heads) == want:
            break
    return heads


def _chain_link(M, N, rhs, tol, rng, is_complex):
    """Next chain vector: any solution of M w = rhs; retries add a null-space
    component to escape dependent configurations without breaking equality."""
    w = min_norm_solve(M, rhs, tol)
    if rng is not None:
        w = w + N @ (_random_unit(rng, N.shape[1], is_complex) * (1.0 + np.linalg.norm(w)))
    return w


def _selection_pass(L22, B2, groups, tol, rng):
    """One full eigenvector/chain selection; returns real (U, Y) stacks or
    None when some group yields no usable head."""
    s = L22.shape[0]
    m = B2.shape[1]
    u_cols: list[np.ndarray] = []
    y_cols: list[np.ndarray] = []
    for mu, mult, is_complex in groups:
        M = np.hstack([L22 - mu * np.eye(s), B2])
        N = nullspace_basis(M, tol)
        if N.shape[1] == 0:
            return None
        heads = _select_heads(N, s, mult, tol, rng, is_complex)
        if not heads:
            return None
        base, extra = divmod(mult, len(heads))
        lengths = [base + 1] * extra + [base] * (len(heads) - extra)
        for head, length in zip(heads, lengths):
            col = head
            for step in range(length):
                if step:
                    col = _chain_link(M, N, col[:s], tol, rng, is_complex)
                u, y = col[:s], col[s:]
                if is_complex:
                    u_cols.extend((u.real, u.imag))
                    y_cols.extend((y.real, y.imag))
                else:
                    u_cols.append(u.real)
                    y_cols.append(y.real)
    U = np.column_stack(u_cols)
    Y = np.column_stack(y_cols) if y_cols else np.zeros((m, 0))
    return U, Y


def reduced_placement(
    Lambda022,
    B2,
    targets,
    tol: Tolerances = _DEFAULT_TOL,
    seed: int = 0,
) -> np.ndarray:
    """Real gain D such that Lambda022 + B2 @ D has exactly `targets` as spectrum.

    For each distinct target value, candidate (state, input) column pairs are
    read off the null space of [Lambda022 - mu I | B2]; multiplicities beyond
    the geometric capacity of that null space are realized as Jordan chains,
    so repeated and defective target sets are allowed. The first pass uses
    the leading null-space basis vectors; a dependent joint selection is
    retried with random unit combinations drawn from a generator seeded by
    `seed` (budget of 16 retries).
    """
    L22 = np.atleast_2d(np.asarray(Lambda022, dtype=float))
    B2m = np.atleast_2d(np.asarray(B2, dtype=float))
    s = L22.shape[0]
    if L22.shape != (s, s):
        raise DimensionMismatch(f"Lambda022 must be square, got {L22.shape}")
    if B2m.shape[0] != s:
        raise DimensionMismatch(f"B2 must have {s} rows, got {B2m.shape[0]}")
    m = B2m.shape[1]
    tgt = np.asarray([complex(t) for t in targets], dtype=complex)
    if tgt.size != s:
        raise DimensionMismatch(f"{tgt.size} targets for a {s}-dimensional block")
    if s == 0:
        return np.zeros((m, 0))
    if not check_controllability(SystemPair(L22, B2m), tol):
        raise NotControllable("(Lambda022, B2) fails the reachability rank test")
    groups = _group_self_conjugate(tgt, tol.match_abs)
    rng = np.random.default_rng(seed)
    for attempt in range(_RETRY_BUDGET + 1):
        stacks = _selection_pass(L22, B2m, groups, tol, rng if attempt else None)
        if stacks is None:
            continue
        U, Y = stacks
        if rank(U, tol) < s:
            continue
        D = np.linalg.solve(U.T, Y.T).T
        achieved = eig(L22 + B2m @ D)[0]
        worst = max(d for *_, d in match_spectra(achieved, tgt, tol))
        if worst <= tol.match_abs * (1.0 + np.linalg.norm(L22) + np.linalg.norm(B2m @ D)):
            return D
    raise SelectionFailed(
        f"no independent eigenvector selection found in {_RETRY_BUDGET} retries"
    )


def stage1(
    dec: InvariantDecomposition, D, tol: Tolerances = _DEFAULT_TOL
) -> np.ndarray:
    """Lift the reduced gain: F1 = D W02, which vanishes on the specified span."""
    Dm = np.atleast_2d(np.asarray(D, dtype=float))
    W02 = dec.W02
    if Dm.shape[1] != W02.shape[0]:
        raise DimensionMismatch(
            f"D has {Dm.shape[1]} columns but W02 has {W02.shape[0]} rows"
        )
    F1 = Dm @ W02
    V01 = dec.V01
    if V01.size:
        drift = np.linalg.norm(F1 @ V01)
        if drift > tol.residual_abs * (1.0 + np.linalg.norm(F1) * np.linalg.norm(V01)):
            raise InvarianceViolated(
                f"lifted gain does not vanish on the specified span (norm {drift:.3e})"
            )
    return F1


@contextmanager
def _stage(name: str):
    try:
        yield
    except EigsurgError as err:
        if err.stage is None:
            err.stage = name
        raise


def synthesize(p: SurgicalProblem, seed: int = 0) -> GainResult:
    """Run the full pipeline and return F = F0 + F1 with its verification.

    Fails fast on the first blocking problem: structural violations raise
    ProblemInvalid, an uncontrollable pair raises NotControllable, an
    infeasible target raises Inadmissible. Numerical failures deeper in the
    pipeline carry the stage name on the exception.
    """
    tol = p.tolerances
    with _stage("validate"):
        violations = validate_structure(p)
        if violations:
            raise ProblemInvalid(violations)
        if not check_controllability(p.system, tol):
            raise NotControllable("(A, B) fails the reachability rank test")
    with _stage("input-directions"):
        z = compute_input_directions(p)
    with _stage("stage0"):
        s0 = stage0(p, z)
    with _stage("decompose"):
        dec = decompose(s0, p.system, tol)
    with _stage("reduced-placement"):
        D = reduced_placement(dec.Lambda022, dec.B2, p.free_eigenvalues, tol, seed)
    with _stage("stage1"):
        F1 = stage1(dec, D, tol)
    F = s0.F0 + F1
    f1_annihilation = float(np.linalg.norm(F1 @ dec.V01)) if dec.V01.size else 0.0
    with _stage("verify"):
        report = verify_closed_loop(
            p.system,
            F,
            p,
            f1_annihilation=f1_annihilation,
            cond_V0=condition_number(dec.V0),
        )
    return GainResult(
        F0=s0.F0,
        F1=F1,
        F=F,
        D=np.atleast_2d(np.asarray(D, dtype=float)),
        decomposition=dec,
        report=report,
    )
