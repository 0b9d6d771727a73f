"""Direct banded solves, bordered elimination, parity-restricted eigenvalues."""

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .bandops import PIVOT_THRESHOLD, BandedOperator, Factorization, factorize
from .errors import (
    DegenerateBorderError,
    DomainError,
    EigenvalueStagnationError,
    SingularSystemError,
)

__all__ = [
    "BandedOperator",
    "Factorization",
    "factorize",
    "LinearSystem",
    "BorderedSystem",
    "solve_linear",
    "solve_bordered",
    "smallest_symmetric_restricted_eigenvalue",
    "restricted_smallest_eigenvalue",
]

_DENSE_FALLBACK_LIMIT = 1500


@dataclass
class LinearSystem:
    operator: BandedOperator
    right_hand_side: np.ndarray

    def __post_init__(self):
        self.right_hand_side = np.asarray(self.right_hand_side, dtype=float)
        if self.right_hand_side.shape != (self.operator.n,):
            raise DomainError("right-hand side does not match operator size")


@dataclass
class BorderedSystem:
    """[[A, c], [r^T, s]] [x; y] = [b; t]."""

    core: LinearSystem
    border_row: np.ndarray
    border_scalar: float
    border_column: np.ndarray
    rhs_scalar: float

    def __post_init__(self):
        n = self.core.operator.n
        self.border_row = np.asarray(self.border_row, dtype=float)
        self.border_column = np.asarray(self.border_column, dtype=float)
        if self.border_row.shape != (n,) or self.border_column.shape != (n,):
            raise DomainError("border dimensions inconsistent with core")


def solve_linear(system):
    """Direct banded solve; singular-to-tolerance raises SingularSystemError."""
    fac = factorize(system.operator)
    if fac.is_singular(PIVOT_THRESHOLD):
        raise SingularSystemError(
            f"operator singular to tolerance (min pivot {fac.min_pivot:.3e})",
            fac.min_pivot,
        )
    b = system.right_hand_side
    x = fac.solve(b)
    # one refinement pass keeps the residual at the contract level
    r = b - system.operator.matvec(x)
    x = x + fac.solve(r)
    return x


def _bem_pass(fac, op, row, s, col, b, t, x, y, denom, w):
    r1 = b - op.matvec(x) - col * y
    r2 = t - float(row @ x) - s * y
    dv = fac.solve(r1)
    dy = (r2 - float(row @ dv)) / denom
    dx = dv - dy * w
    return x + dx, y + dy


def solve_bordered(system):
    """Block elimination with deferred correction.

    Works through fold points where the core alone is singular: the core
    factorization is then shifted by a tiny multiple of the identity and the
    correction passes (run against the true operator) restore accuracy.
    """
    op = system.core.operator
    b = system.core.right_hand_side
    row, s = system.border_row, float(system.border_scalar)
    col, t = system.border_column, float(system.rhs_scalar)

    fac = factorize(op)
    passes = 1
    if fac.is_singular(PIVOT_THRESHOLD):
        tau = 1e-12 * (1.0 + op.scale())
        fac = factorize(op.shifted(tau))
        passes = 2
        if fac.is_singular(PIVOT_THRESHOLD):
            fac = factorize(op.shifted(1e4 * tau))
            passes = 3

    w = fac.solve(col)
    v = fac.solve(b)
    denom = s - float(row @ w)
    scale = 1.0 + abs(s) + float(np.max(np.abs(row))) * (1.0 + float(np.max(np.abs(w))))
    if abs(denom) <= 1e-14 * scale:
        raise DegenerateBorderError("bordered matrix singular (degenerate singularity)")
    y = (t - float(row @ v)) / denom
    x = v - y * w
    for _ in range(passes):
        x, y = _bem_pass(fac, op, row, s, col, b, t, x, y, denom, w)

    bscale = 1.0 + max(float(np.max(np.abs(b))) if b.size else 0.0, abs(t))
    res = max(
        float(np.max(np.abs(b - op.matvec(x) - col * y))),
        abs(t - float(row @ x) - s * y),
    )
    if res > 1e-8 * bscale:
        if op.n <= _DENSE_FALLBACK_LIMIT:
            full = np.zeros((op.n + 1, op.n + 1))
            full[: op.n, : op.n] = op.to_dense()
            full[: op.n, -1] = col
            full[-1, : op.n] = row
            full[-1, -1] = s
            rhs = np.concatenate([b, [t]])
            try:
                sol = np.linalg.solve(full, rhs)
            except np.linalg.LinAlgError as exc:
                raise DegenerateBorderError(f"bordered matrix singular: {exc}") from exc
            return sol[:-1], float(sol[-1])
        raise DegenerateBorderError(
            f"bordered solve failed to converge (residual {res:.3e})"
        )
    return x, y


# ---------------------------------------------------------------------------
# parity-restricted eigenvalues by inverse iteration


def _parity_projector(partner_sub, sub_sign):
    """Projector onto a reflection-parity subspace on a closed index set.

    partner_sub maps each local position to its reflection partner (local
    index); sub_sign is +1 for the symmetric block, -1 antisymmetric.
    """

    def project(v):
        return 0.5 * (v + sub_sign * v[partner_sub])

    return project


def _parity_basis(n, partner, subspace):
    """Orthonormal basis (columns) of a reflection-parity subspace."""
    sub_sign = 1.0 if subspace == "symmetric" else -1.0
    cols = []
    seen = np.zeros(n, dtype=bool)
    inv = 1.0 / math.sqrt(2.0)
    for p in range(n):
        if seen[p]:
            continue
        q = partner[p]
        seen[p] = True
        if q == p:
            if sub_sign > 0:
                e = np.zeros(n)
                e[p] = 1.0
                cols.append(e)
            continue
        seen[q] = True
        e = np.zeros(n)
        e[p] = inv
        e[q] = sub_sign * inv
        cols.append(e)
    if not cols:
        raise DomainError("requested parity subspace is trivial")
    return np.column_stack(cols)


def _dense_restricted_eig(operator, partner, subspace, return_vector):
    basis = _parity_basis(operator.n, partner, subspace)
    jb = np.column_stack([operator.matvec(basis[:, k]) for k in range(basis.shape[1])])
    restricted = basis.T @ jb
    restricted = 0.5 * (restricted + restricted.T)
    w, vecs = np.linalg.eigh(restricted)
    k = int(np.argmin(np.abs(w)))
    rho = float(w[k])
    if return_vector:
        return rho, basis @ vecs[:, k]
    return rho


def restricted_smallest_eigenvalue(
    operator,
    partner,
    subspace,
    rtol=1e-9,
    max_iter=80,
    return_vector=False,
    on_stagnation="raise",
):
    """Smallest-magnitude eigenvalue of `operator` on a parity subspace.

    Inverse iteration with shift 0; `partner` is the reflection permutation
    on the operator's index set (a bijection). Stagnation (clustered band
    modes) either raises EigenvalueStagnationError with the best Rayleigh
    quotient or, with on_stagnation="dense", falls back to an exact dense
    eigensolve of the parity-restricted block.
    """
    n = operator.n
    sub_sign = 1.0 if subspace == "symmetric" else -1.0
    project = _parity_projector(partner, sub_sign)

    rng = np.random.default_rng(1234)
    v = project(rng.standard_normal(n))
    nv = np.linalg.norm(v)
    if nv < 1e-12:  # parity subspace empty
        raise DomainError("requested parity subspace is trivial")
    v /= nv

    fac = factorize(operator)
    if fac.min_pivot == 0.0:
        fac = factorize(operator.shifted(1e-14 * (1.0 + operator.scale())))

    best = (np.inf, None, None)
    for _ in range(max_iter):
        try:
            w = project(fac.solve(v))
        except SingularSystemError:
            break
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            break
        v = w / nw
        av = operator.matvec(v)
        rho = float(v @ av)
        resid = float(np.linalg.norm(av - rho * v))
        if resid < best[0]:
            best = (resid, rho, v.copy())
        if resid <= rtol * max(1.0, abs(rho)):
            return (rho, v) if return_vector else rho
    if on_stagnation == "dense" and n <= 800:
        return _dense_restricted_eig(operator, partner, subspace, return_vector)
    raise EigenvalueStagnationError(
        f"inverse iteration stagnated (best residual {best[0]:.3e})",
        best_rayleigh=best[1],
        best_vector=best[2],
    )


def _restricted_operator(problem, state, tag):
    """Jacobian restricted to the reflection-closed index window.

    Returns (operator, partner_local, keep_positions). For integer chain
    centers and the square point reflection this is the full Jacobian.
    """
    jac = model.jacobian(problem, state)
    keep, partner = model.closed_window_positions(problem.topology, tag)
    n_full = jac.n
    if len(keep) == n_full:
        return jac, partner, keep
    # drop orphan tail sites: contiguous chain sub-block. Couplings to dropped
    # sites land in the band-storage padding slots, which LAPACK ignores.
    keep_sorted = np.sort(keep)
    lo, hi = keep_sorted[0], keep_sorted[-1] + 1
    sub = BandedOperator(jac.bands[:, lo:hi].copy(), jac.kl, jac.ku)
    local = {p: i for i, p in enumerate(keep_sorted)}
    partner_local = np.array([local[partner[p]] for p in keep_sorted])
    return sub, partner_local, keep_sorted


def smallest_symmetric_restricted_eigenvalue(
    problem, state, subspace, tag=None, return_vector=False, on_stagnation="raise"
):
    """Smallest-magnitude Jacobian eigenvalue on a reflection-parity block.

    The state must be reflection-symmetric (possibly with the sign twist)
    so the Jacobian commutes with the plain reflection. subspace is
    "symmetric" or "antisymmetric" (parity w.r.t. the plain reflection).
    """
    if subspace not in ("symmetric", "antisymmetric"):
        raise DomainError("subspace must be symmetric|antisymmetric")
    if tag is None:
        tag = model.SymmetryTag("onsite", 0, 1)
    op, partner_local, keep = _restricted_operator(problem, state, tag)
    result = restricted_smallest_eigenvalue(
        op,
        partner_local,
        subspace,
        return_vector=return_vector,
        on_stagnation=on_stagnation,
    )
    if not return_vector:
        return result
    rho, v_local = result
    v_full = np.zeros(problem.topology.site_count)
    v_full[keep] = v_local
    return rho, v_full
