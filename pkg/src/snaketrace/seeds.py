"""Anti-continuum-limit seed profiles and Newton refinement.

At d=0 every site decouples, so any profile whose values are roots of the
on-site reaction is an exact steady state; these persist for small |d| and
Newton refinement converges onto the true state.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .bandops import factorize
from .errors import CapacityError, DomainError, RefinementError

TAIL_MARGIN = 10


def _plateau_positions(topology, plateau_length, parity):
    """Array positions of the plateau and the symmetry tag."""
    if topology.kind != "chain":
        raise DomainError("plateau seeds are chain profiles")
    ext = topology.extent
    if parity == "onsite":
        if plateau_length % 2 == 0 and plateau_length != 0:
            raise DomainError("onsite plateaus have odd length")
        tag = model.SymmetryTag("onsite", 0, 1)
        half = (plateau_length - 1) // 2 if plateau_length else -1
        lo, hi = -half, half
    elif parity == "offsite":
        if plateau_length % 2 != 0:
            raise DomainError("offsite plateaus have even length")
        tag = model.SymmetryTag("offsite", -1, 1)
        lo, hi = -plateau_length // 2, plateau_length // 2 - 1
    else:
        raise DomainError(f"unknown parity {parity!r}")
    if plateau_length == 0:
        return np.array([], dtype=int), tag
    if lo < -ext + TAIL_MARGIN or hi > ext - TAIL_MARGIN:
        raise CapacityError(
            f"plateau of length {plateau_length} leaves fewer than "
            f"{TAIL_MARGIN} zero sites in extent {ext}"
        )
    return np.arange(lo, hi + 1) + ext, tag


def flat_plateau_seed(topology, plateau_length, parity, mu):
    """Plateau of U_+(mu) with zero tails; exact steady state at d=0."""
    if not 0.0 < mu < 1.0:
        raise DomainError("plateau seeds need 0 < mu < 1")
    pos, tag = _plateau_positions(topology, plateau_length, parity)
    vals = np.zeros(topology.shape)
    vals[pos] = model.upper_state(mu)
    return model.LatticeState(topology, vals), tag


def cycle_plateau_seed(topology, period, pattern, plateau_length, parity, mu):
    """Plateau tiling sign*U_+(mu) periodically (oscillatory states).

    pattern entries are +-1 and are laid out from the left end of the
    plateau. Odd lengths of the 2-cycle are plainly reflection-symmetric;
    even lengths pick up the sign-twisted symmetry (the seed's tag records
    which).
    """
    if period < 2:
        raise DomainError("cycle period must be >= 2")
    if len(pattern) != period or any(s not in (-1, 1) for s in pattern):
        raise DomainError("pattern must list +-1 signs, one per period")
    if not 0.0 < mu < 1.0:
        raise DomainError("plateau seeds need 0 < mu < 1")
    pos, tag = _plateau_positions(topology, plateau_length, parity)
    vals = np.zeros(topology.shape)
    amp = model.upper_state(mu)
    for i, p in enumerate(pos):
        vals[p] = pattern[i % period] * amp
    state = model.LatticeState(topology, vals)
    tag = _resolve_tag_sign(state, tag)
    return state, tag


def _resolve_tag_sign(state, tag):
    for sign in (1, -1):
        cand = model.SymmetryTag(tag.kind, tag.center2, sign)
        if model.symmetry_residual(state, cand) == 0.0:
            return cand
    return model.SymmetryTag("asymmetric", tag.center2, 1)


def square_patch_seed(topology, side, mu):
    """Centered side x side block of U_+(mu) on the square lattice."""
    if topology.kind != "square":
        raise DomainError("patch seeds require the square topology")
    if not 0.0 < mu < 1.0:
        raise DomainError("patch seeds need 0 < mu < 1")
    if side < 0:
        raise DomainError("side must be nonnegative")
    ext = topology.extent
    if side % 2 == 1:
        half = (side - 1) // 2
        lo, hi = -half, half
    else:
        lo, hi = -side // 2, side // 2 - 1
    if side and (lo < -ext + TAIL_MARGIN or hi > ext - TAIL_MARGIN):
        raise CapacityError(f"side {side} patch leaves margin < {TAIL_MARGIN}")
    vals = np.zeros(topology.shape)
    if side:
        sl = slice(lo + ext, hi + ext + 1)
        vals[sl, sl] = model.upper_state(mu)
    tag = model.SymmetryTag("onsite", 0, 1) if side % 2 == 1 else model.SymmetryTag("none")
    return model.LatticeState(topology, vals), tag


@dataclass
class RefineInfo:
    iterations: int
    residual_norms: list
    converged: bool


def ramp_coupling(
    problem, state, d_target, initial_step=0.05, min_step=1e-4, tol=1e-10
):
    """March a steady state from problem.d to d_target at fixed mu.

    The anti-continuum Newton basin shrinks with |d|, so seeds are refined
    at small coupling and continued toward the target in adaptive d-steps.
    A step is rejected (and halved) when Newton fails or the state loses
    localization (collapses toward zero or delocalizes).
    """
    d = problem.d
    cur = refine(problem, state, tol=tol)
    ref_sup = max(cur.sup_norm, 0.5 * model.upper_state(min(problem.mu, 1.0)))
    step = initial_step
    while d != d_target:
        move = d_target - d
        d_next = d + math.copysign(min(abs(move), step), move)
        try:
            cand = refine(problem.with_d(d_next), cur, tol=tol)
            if cand.sup_norm < 0.25 * ref_sup:
                raise RefinementError("state collapsed during coupling ramp")
        except RefinementError:
            step *= 0.5
            if step < min_step:
                raise
            continue
        cur, d = cand, d_next
        step = min(initial_step, 2.0 * step)
    return cur


def refine(problem, seed, tol=1e-10, max_iter=25, return_info=False):
    """Newton-refine a seed into a steady state of the coupled system.

    Damped Newton: the step is halved while the residual sup-norm fails to
    decrease. Non-convergence raises RefinementError carrying the last
    iterate and its residual norm.
    """
    state = seed
    r = model.residual(problem, state)
    rn = r.sup_norm
    norms = [rn]
    if rn <= tol:
        return (state, RefineInfo(0, norms, True)) if return_info else state
    for it in range(1, max_iter + 1):
        jac = model.jacobian(problem, state)
        fac = factorize(jac)
        if fac.is_singular():
            raise RefinementError(
                f"Jacobian singular during refinement (min pivot {fac.min_pivot:.2e})",
                last_iterate=state,
                residual_norm=rn,
                iterations=it,
            )
        step = fac.solve(-r.flat())
        flat = state.flat()
        lam = 1.0
        for _ in range(9):
            cand = state.with_flat(flat + lam * step)
            rc = model.residual(problem, cand)
            if rc.sup_norm < rn:
                break
            lam *= 0.5
        state, r, rn = cand, rc, rc.sup_norm
        norms.append(rn)
        if rn <= tol:
            return (state, RefineInfo(it, norms, True)) if return_info else state
    raise RefinementError(
        f"no convergence after {max_iter} Newton iterations (residual {rn:.3e})",
        last_iterate=state,
        residual_norm=rn,
        iterations=max_iter,
    )
