"""Problem data model, structural validation, and admissibility.

Holds the open-loop pair, the eigenstructure targets, the checks that decide
whether a real gain with the requested structure can exist, and the
computation of the per-target input directions that stage 0 consumes.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    Inadmissible,
    NotReal,
    PairingMismatch,
    SchemaError,
)
from .numerics import Tolerances, as_real_matrix, min_norm_solve, rank

_DEFAULT_TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SystemPair:
    """Open-loop model (A, B) for the dynamics x' = A x + B u."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_real_matrix(self.A, "A")
        B = as_real_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"B must have {A.shape[0]} rows, got {B.shape[0]}")
        if A.shape[0] < 1 or B.shape[1] < 1:
            raise DimensionMismatch("state and input dimensions must be at least 1")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class EigenTarget:
    """One eigenvalue with its target eigenvector or generalized eigenvector.

    ``chain_parent`` is None for a true eigenvector. Otherwise it indexes the
    previous vector of the same Jordan chain, which must appear earlier in
    the target list and carry the same eigenvalue.
    """

    eigenvalue: complex
    vector: np.ndarray
    chain_parent: int | None = None

    def __post_init__(self):
        lam = complex(self.eigenvalue)
        if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
            raise ValueError("eigenvalue must be finite")
        v = np.array(self.vector, dtype=complex, copy=True).reshape(-1)
        if v.size == 0:
            raise DimensionMismatch("target vector must be nonempty")
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValueError("target vector contains non-finite entries")
        if np.linalg.norm(v) == 0.0:
            raise ValueError("target vector must be nonzero")
        if self.chain_parent is not None and (
            not isinstance(self.chain_parent, int) or self.chain_parent < 0
        ):
            raise ValueError(f"chain_parent must be None or a nonnegative index")
        object.__setattr__(self, "eigenvalue", lam)
        object.__setattr__(self, "vector", _frozen(v))


@dataclass(frozen=True, eq=False)
class SurgicalProblem:
    """A full problem instance: system, specified targets, free eigenvalues."""

    system: SystemPair
    specified: tuple[EigenTarget, ...]
    free_eigenvalues: tuple[complex, ...]
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        specified = tuple(self.specified)
        free = tuple(complex(x) for x in self.free_eigenvalues)
        n = self.system.n
        if len(specified) + len(free) != n:
            raise DimensionMismatch(
                f"{len(specified)} targets + {len(free)} free eigenvalues != n = {n}"
            )
        for i, t in enumerate(specified):
            if t.vector.shape[0] != n:
                raise DimensionMismatch(
                    f"target {i}: vector has length {t.vector.shape[0]}, expected {n}"
                )
            if t.chain_parent is not None and t.chain_parent >= len(specified):
                raise ValueError(f"target {i}: chain_parent {t.chain_parent} out of range")
        for lam in free:
            if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
                raise ValueError("free eigenvalues must be finite")
        object.__setattr__(self, "specified", specified)
        object.__setattr__(self, "free_eigenvalues", free)

    @property
    def r(self) -> int:
        return len(self.specified)

    @property
    def target_matrix(self) -> np.ndarray:
        """Specified vectors as the columns of an n x r complex matrix."""
        n = self.system.n
        if not self.specified:
            return np.zeros((n, 0), dtype=complex)
        return np.column_stack([t.vector for t in self.specified])


@dataclass(frozen=True, eq=False)
class InputDirections:
    """Per-target input-space directions z_i; B z_i supplies each target's defect."""

    z: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class Violation:
    """One failed structural condition, reported as data rather than an error.

    Codes: ``condition-i`` (specified vectors dependent), ``condition-ii``
    (conjugate pairing of targets broken), ``condition-iv`` (free eigenvalue
    multiset not self-conjugate), ``chain-order`` (chain predecessor missing,
    misplaced, or carrying a different eigenvalue).
    """

    condition: str
    indices: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        where = ", ".join(str(i) for i in self.indices)
        return f"{self.condition} at [{where}]: {self.detail}"


def validate_structure(p: SurgicalProblem) -> list[Violation]:
    """Check every structural admissibility condition; empty list means valid.

    Verifies joint independence of the specified vectors, conjugate closure
    of targets (with mirrored chain links), self-conjugacy of the free
    eigenvalue multiset, and chain ordering. Violations are data; nothing
    here raises on bad structure.
    """
    tol = p.tolerances
    tgts = p.specified
    r = len(tgts)
    out: list[Violation] = []

    for i, t in enumerate(tgts):
        k = t.chain_parent
        if k is None:
            continue
        if k >= i:
            out.append(Violation("chain-order", (i,), "chain parent must precede its child"))
        elif abs(tgts[k].eigenvalue - t.eigenvalue) > tol.match_abs:
            out.append(
                Violation("chain-order", (k, i), "chain parent carries a different eigenvalue")
            )

    if r:
        V = p.target_matrix
        if rank(V, tol) < r:
            for j in range(1, r):
                if rank(V[:, : j + 1], tol) > rank(V[:, :j], tol):
                    continue
                # name the columns the dependent one is built from
                coef, *_ = np.linalg.lstsq(V[:, :j], V[:, j], rcond=tol.rank_rel)
                top = np.max(np.abs(coef)) if coef.size else 0.0
                support = [i for i in range(j) if abs(coef[i]) > 1e-8 * (1.0 + top)]
                out.append(
                    Violation(
                        "condition-i",
                        tuple(support + [j]),
                        "specified vectors are linearly dependent",
                    )
                )

    is_complex = [abs(t.eigenvalue.imag) > tol.match_abs for t in tgts]
    partner: dict[int, int] = {}
    for i, t in enumerate(tgts):
        if not is_complex[i]:
            v = t.vector
            if np.linalg.norm(v.imag) > tol.residual_abs * (1.0 + np.linalg.norm(v)):
                out.append(
                    Violation("condition-ii", (i,), "complex vector attached to a real eigenvalue")
                )
            continue
        if i in partner:
            continue
        lam, v = t.eigenvalue, t.vector
        mate = None
        for k in range(r):
            if k == i or k in partner or not is_complex[k]:
                continue
            tk = tgts[k]
            if abs(tk.eigenvalue - lam.conjugate()) > tol.match_abs:
                continue
            if np.linalg.norm(tk.vector - v.conj()) > tol.residual_abs * (1.0 + np.linalg.norm(v)):
                continue
            pi, pk = t.chain_parent, tk.chain_parent
            if (pi is None) != (pk is None):
                continue
            if pi is not None and partner.get(pi) != pk:
                continue
            mate = k
            break
        if mate is None:
            out.append(Violation("condition-ii", (i,), "no conjugate partner target"))
        else:
            partner[i] = mate
            partner[mate] = i

    free = list(p.free_eigenvalues)
    unused = set(range(len(free)))
    for i, lam in enumerate(free):
        if i not in unused:
            continue
        if abs(lam.imag) <= tol.match_abs:
            unused.discard(i)
            continue
        mate = None
        for k in sorted(unused):
            if k != i and abs(free[k] - lam.conjugate()) <= tol.match_abs:
                mate = k
                break
        unused.discard(i)
        if mate is None:
            out.append(
                Violation("condition-iv", (i,), "free eigenvalue has no conjugate partner")
            )
        else:
            unused.discard(mate)

    return out


def check_controllability(s: SystemPair, tol: Tolerances = _DEFAULT_TOL) -> bool:
    """Rank test on the reachability matrix [B, AB, ..., A^(n-1) B]."""
    blocks = [s.B]
    for _ in range(s.n - 1):
        blocks.append(s.A @ blocks[-1])
    return rank(np.hstack(blocks), tol) == s.n


def conjugate_pairing(
    targets: tuple[EigenTarget, ...], tol: Tolerances = _DEFAULT_TOL
) -> list[tuple[int, int]]:
    """Pair complex-eigenvalue targets with their conjugate partners.

    Each pair is (i, k) with target i the positive-imaginary-part member; in
    realified matrices position i receives the real part and position k the
    imaginary part. Raises PairingMismatch on broken pairing; run
    validate_structure first for a full diagnosis instead of an exception.
    """
    pairs: list[tuple[int, int]] = []
    used: set[int] = set()
    for i, t in enumerate(targets):
        if i in used:
            continue
        lam = t.eigenvalue
        if abs(lam.imag) <= tol.match_abs:
            v = t.vector
            if np.linalg.norm(v.imag) > tol.residual_abs * (1.0 + np.linalg.norm(v)):
                raise PairingMismatch(f"target {i}: complex vector attached to a real eigenvalue")
            continue
        mate = None
        for k in range(i + 1, len(targets)):
            if k in used:
                continue
            tk = targets[k]
            if abs(tk.eigenvalue - lam.conjugate()) <= tol.match_abs and np.linalg.norm(
                tk.vector - t.vector.conj()
            ) <= tol.residual_abs * (1.0 + np.linalg.norm(t.vector)):
                mate = k
                break
        if mate is None:
            raise PairingMismatch(f"target {i}: no conjugate partner target")
        used.update((i, mate))
        pairs.append((i, mate) if lam.imag > 0 else (mate, i))
    return pairs


def compute_input_directions(p: SurgicalProblem) -> InputDirections:
    """Input direction z_i for every target, solving B z_i = c_i.

    The defect c_i the feedback must supply is -(A - lambda_i I) v_i for an
    eigenvector and gains the chain predecessor v_parent for a generalized
    eigenvector. Existence is decided by comparing rank(B) against
    rank([B | c_i]); when c_i lies outside range(B) the target is
    inadmissible and no gain with the requested structure exists.

    Conjugate partners receive exactly conjugated directions (computed once,
    from the positive-imaginary-part member).
    """
    A, B = p.system.A, p.system.B
    n = p.system.n
    tol = p.tolerances
    tgts = p.specified
    pairs = conjugate_pairing(tgts, tol)
    mirror = {k: i for i, k in pairs}
    rank_B = rank(B, tol)
    z: list[np.ndarray | None] = [None] * len(tgts)
    for i, t in enumerate(tgts):
        if i in mirror:
            continue
        c = -((A - t.eigenvalue * np.eye(n)) @ t.vector)
        if t.chain_parent is not None:
            c = c + tgts[t.chain_parent].vector
        if rank(np.column_stack([B, c]), tol) > rank_B:
            raise Inadmissible(i)
        z[i] = min_norm_solve(B, c, tol)
    for i, k in pairs:
        z[k] = np.conj(z[i])
    return InputDirections(tuple(z))


def realify_columns(
    V, pairing: list[tuple[int, int]], tol: Tolerances = _DEFAULT_TOL
) -> np.ndarray:
    """Replace conjugate column pairs by their real and imaginary parts.

    For each (i, k) in ``pairing``, column k must be the conjugate of column
    i (within the residual tolerance); the output carries Re at position i
    and Im at position k. Columns outside every pair must be real and pass
    through unchanged. The result is a real matrix of the same shape
    spanning the same space over the reals.
    """
    M = np.array(np.atleast_2d(np.asarray(V)), dtype=complex)
    cols = M.shape[1]
    seen: set[int] = set()
    for i, k in pairing:
        if not (0 <= i < cols and 0 <= k < cols) or i == k:
            raise PairingMismatch(f"invalid column pair ({i}, {k})")
        if i in seen or k in seen:
            raise PairingMismatch(f"column pair ({i}, {k}) overlaps another pair")
        ci = M[:, i]
        if np.linalg.norm(M[:, k] - ci.conj()) > tol.residual_abs * (1.0 + np.linalg.norm(ci)):
            raise PairingMismatch(f"columns {i} and {k} are not conjugates")
        seen.update((i, k))
    for j in range(cols):
        if j in seen:
            continue
        if np.linalg.norm(M[:, j].imag) > tol.residual_abs * (1.0 + np.linalg.norm(M[:, j])):
            raise NotReal(f"unpaired column {j} has a non-negligible imaginary part")
    out = M.real.copy()
    for i, k in pairing:
        out[:, i] = M[:, i].real
        out[:, k] = M[:, i].imag
    return out


def _doc_field(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing required key '{key}'")
    return doc[key]


def _parse_complex(node, where: str) -> complex:
    if (
        not isinstance(node, (list, tuple))
        or len(node) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in node)
    ):
        raise SchemaError(f"{where}: complex scalars are 2-arrays [re, im]")
    return complex(float(node[0]), float(node[1]))


def _parse_real_matrix(node, where: str) -> np.ndarray:
    if not isinstance(node, list) or not node or not all(isinstance(row, list) for row in node):
        raise SchemaError(f"{where}: expected a nonempty array of row arrays")
    width = len(node[0])
    for idx, row in enumerate(node):
        if len(row) != width:
            raise SchemaError(f"{where}: row {idx} has length {len(row)}, expected {width}")
        for x in row:
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise SchemaError(f"{where}: entries must be numbers")
    if width == 0:
        raise SchemaError(f"{where}: rows must be nonempty")
    try:
        return as_real_matrix(node, where)
    except ValueError as err:
        raise SchemaError(str(err)) from err


def parse_problem(text: str, tolerances: Tolerances | None = None) -> SurgicalProblem:
    """Parse a JSON problem document.

    Schema::

        {
          "A": [[...], ...],                    // n x n
          "B": [[...], ...],                    // n x m
          "specified": [
            {"eigenvalue": [re, im],
             "vector": [[re, im], ...],         // length n
             "chain_parent": null | index}, ...
          ],
          "free_eigenvalues": [[re, im], ...]   // n - r entries
        }

    Shape-level invariants are enforced here (SchemaError / DimensionMismatch);
    the conjugacy and independence conditions are left to validate_structure
    so that a parseable-but-inadmissible file can be diagnosed in full.
    """

    def _reject_constant(token):
        raise SchemaError(f"non-finite number {token!r} is not allowed")

    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise SchemaError("top-level document must be a JSON object")

    A = _parse_real_matrix(_doc_field(doc, "A", "problem"), "A")
    B = _parse_real_matrix(_doc_field(doc, "B", "problem"), "B")
    try:
        system = SystemPair(A, B)
    except ValueError as err:
        raise SchemaError(str(err)) from err

    spec_node = _doc_field(doc, "specified", "problem")
    if not isinstance(spec_node, list):
        raise SchemaError("'specified' must be an array")
    targets: list[EigenTarget] = []
    for idx, entry in enumerate(spec_node):
        where = f"specified[{idx}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: expected an object")
        lam = _parse_complex(_doc_field(entry, "eigenvalue", where), f"{where}.eigenvalue")
        vec_node = _doc_field(entry, "vector", where)
        if not isinstance(vec_node, list) or not vec_node:
            raise SchemaError(f"{where}.vector: expected a nonempty array")
        vec = np.array(
            [_parse_complex(x, f"{where}.vector[{j}]") for j, x in enumerate(vec_node)]
        )
        parent_node = _doc_field(entry, "chain_parent", where)
        if parent_node is not None and (isinstance(parent_node, bool) or not isinstance(parent_node, int)):
            raise SchemaError(f"{where}.chain_parent: must be null or an integer index")
        if parent_node is not None and not (0 <= parent_node < len(spec_node)):
            raise SchemaError(f"{where}.chain_parent: index {parent_node} out of range")
        try:
            targets.append(EigenTarget(lam, vec, parent_node))
        except ValueError as err:
            raise SchemaError(f"{where}: {err}") from err

    free_node = _doc_field(doc, "free_eigenvalues", "problem")
    if not isinstance(free_node, list):
        raise SchemaError("'free_eigenvalues' must be an array")
    free = tuple(
        _parse_complex(x, f"free_eigenvalues[{j}]") for j, x in enumerate(free_node)
    )

    try:
        return SurgicalProblem(
            system, tuple(targets), free, tolerances if tolerances is not None else Tolerances()
        )
    except ValueError as err:
        raise SchemaError(str(err)) from err
