"""Pseudo-arclength continuation with fold/pitchfork handling.

Tangent predictor, bordered Newton corrector orthogonal to the previous
tangent, adaptive step size. Folds are refined by bisection on the tangent's
mu-component, pitchforks by bisection on the symmetry-breaking parity
eigenvalue; ladder (asymmetric) branches are started from the stored null
direction and terminate when reflection symmetry is restored.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import model, solver
from .errors import (
    DegenerateBorderError,
    EigenvalueStagnationError,
    RefinementError,
    SingularSystemError,
    SwitchingError,
)

logger = logging.getLogger("snaketrace.continuation")


@dataclass(frozen=True)
class ContinuationSettings:
    initial_step: float = 0.02
    min_step: float = 1e-7
    max_step: float = 0.5
    max_steps: int = 4000
    residual_tol: float = 1e-10
    max_corrector_iters: int = 12
    fast_corrector_iters: int = 3  # step doubles at or below this many iterations
    mu_window: tuple = (-0.5, 1.5)
    norm_cap: float = 500.0
    direction: float = -1.0
    detect_folds: bool = True
    detect_pitchforks: Optional[bool] = None  # default: symmetric chain branches
    compute_parity_eigs: Optional[bool] = None
    closure_rel: float = 1e-6
    closure_state_tol: float = 1e-5
    closure_min_arclength_factor: float = 10.0
    bisection_budget: int = 60
    fold_tol: float = 1e-8
    pitchfork_tol: float = 1e-8
    stop_after_folds: Optional[int] = None
    asym_terminate_tol: float = 1e-6
    asym_creep_threshold: float = 0.05  # start shrinking steps below this measure
    min_points_isola: int = 20

    def updated(self, **kw):
        return replace(self, **kw)


@dataclass
class BranchPoint:
    mu: float
    state: object
    norm_sq: float
    tangent: np.ndarray
    parity_eigs: Optional[tuple]
    arclength: float
    n_folds_so_far: int
    step_used: float = 0.0
    corrector_iters: int = 0


@dataclass
class BifurcationEvent:
    kind: str  # "fold" | "pitchfork"
    mu: float
    index: float  # fractional position between branch points
    refined_state: object
    side: Optional[str] = None  # folds: "left" (mu min) | "right" (mu max)
    tangent_mu: Optional[float] = None
    eig_value: Optional[float] = None
    null_direction: Optional[np.ndarray] = None


@dataclass
class Branch:
    points: list
    events: list
    classification: str
    symmetry: Optional[model.SymmetryTag]
    truncation_reason: str
    closed: bool = False
    terminal_info: dict = field(default_factory=dict)
    problem_info: dict = field(default_factory=dict)

    @property
    def fold_events(self):
        return [e for e in self.events if e.kind == "fold"]

    @property
    def pitchfork_events(self):
        return [e for e in self.events if e.kind == "pitchfork"]

    def fold_mus(self, side=None):
        return [e.mu for e in self.fold_events if side is None or e.side == side]


# ---------------------------------------------------------------------------
# operator adapters


class LatticeOps:
    """Continuation-facing view of a lattice problem at varying mu."""

    def __init__(self, problem, tag=None, settings=None):
        self.problem = problem
        self.tag = tag
        self.n = problem.topology.site_count
        chainlike = problem.topology.kind == "chain"
        symmetric = tag is not None and tag.symmetric
        s = settings or ContinuationSettings()
        if s.compute_parity_eigs is None:
            self.want_eigs = chainlike and symmetric
        else:
            self.want_eigs = s.compute_parity_eigs and symmetric
        # block whose eigenvalue crossing signals symmetry breaking:
        # plain-symmetric branches break in the antisymmetric block and
        # sign-twisted branches in the plain-symmetric block.
        self.breaking_block = None
        if symmetric:
            self.breaking_block = 1 if tag.sign == 1 else 0

    def residual(self, mu, flat):
        st = self.make_state(flat)
        return model.residual(self.problem.with_mu(mu), st).flat()

    def jacobian(self, mu, flat):
        st = self.make_state(flat)
        return model.jacobian(self.problem.with_mu(mu), st)

    def dmu(self, flat):
        return -np.asarray(flat, dtype=float)

    def make_state(self, flat):
        return model.LatticeState(
            self.problem.topology,
            np.asarray(flat, dtype=float).reshape(self.problem.topology.shape),
        )

    def norm_sq(self, flat):
        f = np.asarray(flat)
        return float(f @ f)

    def parity_eigs(self, mu, flat, return_breaking_vector=False):
        if not self.want_eigs:
            return (None, None)
        st = self.make_state(flat)
        prob = self.problem.with_mu(mu)
        out = []
        vec = None
        for i, sub in enumerate(("symmetric", "antisymmetric")):
            want_vec = return_breaking_vector and i == self.breaking_block
            try:
                res = solver.smallest_symmetric_restricted_eigenvalue(
                    prob, st, sub, tag=self.tag, return_vector=want_vec,
                    on_stagnation="dense",
                )
            except EigenvalueStagnationError as exc:
                logger.debug("parity eigensolve stagnated: %s", exc)
                res = (exc.best_rayleigh, exc.best_vector) if want_vec else exc.best_rayleigh
            if want_vec:
                rho, vec = res
                out.append(rho)
            else:
                out.append(res)
        if return_breaking_vector:
            return tuple(out), vec
        return tuple(out)

    def asymmetry(self, flat):
        if self.tag is None or self.problem.topology.kind != "chain":
            return None
        st = self.make_state(flat)
        if self.tag.symmetric:
            base = self.tag
        else:
            c2 = self.tag.center2
            kind = "onsite" if c2 % 2 == 0 else "offsite"
            base = model.SymmetryTag(kind, c2, 1)
        return model.asymmetry_measure(st, base)


# ---------------------------------------------------------------------------
# core stepping machinery


def _extended_residual(ops, z):
    return ops.residual(z[-1], z[:-1])


def _solve_tangent(ops, z, ref):
    jac = ops.jacobian(z[-1], z[:-1])
    col = ops.dmu(z[:-1])
    sys = solver.BorderedSystem(
        solver.LinearSystem(jac, np.zeros(ops.n)), ref[:-1], float(ref[-1]), col, 1.0
    )
    x, y = solver.solve_bordered(sys)
    tau = np.concatenate([x, [y]])
    tau /= np.linalg.norm(tau)
    if float(tau @ ref) < 0:
        tau = -tau
    return tau


def _correct(ops, z_pred, ref, z_prev, h, settings):
    """Newton corrector in the hyperplane ref.(z - z_prev) = h."""
    z = z_pred.copy()
    last_norm = math.inf
    for it in range(1, settings.max_corrector_iters + 1):
        f = _extended_residual(ops, z)
        fn = float(np.max(np.abs(f))) if f.size else 0.0
        cn = float(ref @ (z - z_prev) - h)
        if fn <= settings.residual_tol and abs(cn) <= 1e-12 * (1.0 + abs(h)):
            return z, it
        if not math.isfinite(fn) or fn > 1e6 * (1.0 + last_norm):
            raise RefinementError("corrector diverged", residual_norm=fn, iterations=it)
        last_norm = fn
        jac = ops.jacobian(z[-1], z[:-1])
        col = ops.dmu(z[:-1])
        sys = solver.BorderedSystem(
            solver.LinearSystem(jac, -f), ref[:-1], float(ref[-1]), col, -cn
        )
        dx, dy = solver.solve_bordered(sys)
        z = z + np.concatenate([dx, [dy]])
    f = _extended_residual(ops, z)
    fn = float(np.max(np.abs(f)))
    if fn <= settings.residual_tol:
        return z, settings.max_corrector_iters
    raise RefinementError(
        f"corrector exceeded {settings.max_corrector_iters} iterations",
        residual_norm=fn,
        iterations=settings.max_corrector_iters,
    )


def _point_from(ops, z, tau, eigs, arclength, nfolds, h, iters):
    return BranchPoint(
        mu=float(z[-1]),
        state=ops.make_state(z[:-1]),
        norm_sq=ops.norm_sq(z[:-1]),
        tangent=tau,
        parity_eigs=eigs,
        arclength=arclength,
        n_folds_so_far=nfolds,
        step_used=h,
        corrector_iters=iters,
    )


def _breaking_eig(ops, eigs):
    if eigs is None or ops.breaking_block is None:
        return None
    return eigs[ops.breaking_block]


class _Segment:
    """Correct-and-probe helper between two accepted points."""

    def __init__(self, ops, z_a, tau_a, settings):
        self.ops = ops
        self.z_a = z_a
        self.tau_a = tau_a
        self.settings = settings

    def at(self, s, h):
        z_pred = self.z_a + (s * h) * self.tau_a
        z, _ = _correct(self.ops, z_pred, self.tau_a, self.z_a, s * h, self.settings)
        tau = _solve_tangent(self.ops, z, self.tau_a)
        return z, tau


def _bisect_fold(ops, seg, h, f0, f1, settings):
    lo, hi = 0.0, 1.0
    flo, fhi = f0, f1
    z_best, tau_best, s_best = None, None, None
    for _ in range(settings.bisection_budget):
        s = 0.5 * (lo + hi)
        try:
            z, tau = seg.at(s, h)
        except (RefinementError, SingularSystemError, DegenerateBorderError):
            return None
        fm = float(tau[-1])
        z_best, tau_best, s_best = z, tau, s
        if abs(fm) <= settings.fold_tol:
            break
        if flo * fm < 0:
            hi, fhi = s, fm
        else:
            lo, flo = s, fm
        if flo * fhi > 0:
            logger.info("fold sign change lost during refinement; event discarded")
            return None
    if z_best is None or abs(float(tau_best[-1])) > 10 * settings.fold_tol:
        logger.info("fold bisection did not converge; event discarded")
        return None
    side = "left" if (f0 < 0 < f1) else "right"
    return BifurcationEvent(
        kind="fold",
        mu=float(z_best[-1]),
        index=s_best,
        refined_state=ops.make_state(z_best[:-1]),
        side=side,
        tangent_mu=float(tau_best[-1]),
    )


def _bisect_pitchfork(ops, seg, h, g0, g1, settings):
    lo, hi = 0.0, 1.0
    glo, ghi = g0, g1
    best = None
    for _ in range(settings.bisection_budget):
        s = 0.5 * (lo + hi)
        try:
            z, tau = seg.at(s, h)
        except (RefinementError, SingularSystemError, DegenerateBorderError):
            return None
        eigs, vec = ops.parity_eigs(z[-1], z[:-1], return_breaking_vector=True)
        gm = _breaking_eig(ops, eigs)
        if gm is None:
            return None
        best = (z, s, gm, vec)
        if abs(gm) <= settings.pitchfork_tol:
            break
        if glo * gm < 0:
            hi, ghi = s, gm
        else:
            lo, glo = s, gm
        if glo * ghi > 0:
            logger.info("pitchfork sign change lost during refinement; discarded")
            return None
    if best is None or abs(best[2]) > 10 * settings.pitchfork_tol:
        logger.info("pitchfork bisection did not converge; event discarded")
        return None
    z, s, gm, vec = best
    return BifurcationEvent(
        kind="pitchfork",
        mu=float(z[-1]),
        index=s,
        refined_state=ops.make_state(z[:-1]),
        eig_value=gm,
        null_direction=vec,
    )


def _closure_projection(ops, z_prev, tau, z_start, settings, h_eff):
    """Correct from z_prev onto the section through the start point.

    Only meaningful when the section lies ahead along the tangent (the
    circuit is being completed, not just left).
    """
    h_c = float(tau @ (z_start - z_prev))
    if not 1e-12 < h_c <= 2.5 * h_eff:
        return None
    try:
        z_c, _ = _correct(ops, z_start.copy(), tau, z_prev, h_c, settings)
    except (RefinementError, SingularSystemError, DegenerateBorderError):
        return None
    return z_c


def _closure_match(ops, z_c, first, settings):
    mu0, ns0 = first.mu, first.norm_sq
    return (
        abs(float(z_c[-1]) - mu0) <= settings.closure_rel * (1 + abs(mu0))
        and abs(ops.norm_sq(z_c[:-1]) - ns0) <= settings.closure_rel * (1 + ns0)
        and float(np.max(np.abs(z_c[:-1] - first.state.flat())))
        <= settings.closure_state_tol
    )


def trace_core(ops, z0, settings, tag=None):
    """Trace one branch from the converged extended point z0 = (U, mu)."""
    want_pf = settings.detect_pitchforks
    if want_pf is None:
        want_pf = ops.want_eigs
    track_asym = tag is not None and tag.kind == "asymmetric"

    # initial tangent: prefer the mu direction
    ref0 = np.zeros(len(z0))
    ref0[-1] = settings.direction if settings.direction != 0 else -1.0
    tau = _solve_tangent(ops, z0, ref0)

    eigs0 = ops.parity_eigs(z0[-1], z0[:-1]) if ops.want_eigs else None
    points = [_point_from(ops, z0, tau, eigs0, 0.0, 0, 0.0, 0)]
    events = []
    closed = False
    terminal = {}
    reason = "max_steps"
    h = settings.initial_step
    nfolds = 0
    arclength = 0.0
    asym_cap = math.inf  # step cap while closing in on a symmetric endpoint

    for _ in range(settings.max_steps):
        prev = points[-1]
        z_prev = np.concatenate([prev.state.flat() if hasattr(prev.state, "flat") else prev.state, [prev.mu]])
        h_eff = min(h, asym_cap)
        z_pred = z_prev + h_eff * prev.tangent
        try:
            z_new, iters = _correct(ops, z_pred, prev.tangent, z_prev, h_eff, settings)
        except (RefinementError, SingularSystemError, DegenerateBorderError):
            if h_eff <= settings.min_step * (1 + 1e-9):
                reason = "corrector_failure"
                break
            h = max(settings.min_step, 0.5 * h_eff)
            continue

        try:
            tau_new = _solve_tangent(ops, z_new, prev.tangent)
        except (SingularSystemError, DegenerateBorderError):
            reason = "degenerate_tangent"
            break

        eigs_new = ops.parity_eigs(z_new[-1], z_new[:-1]) if ops.want_eigs else None
        dz = float(np.linalg.norm(z_new - z_prev))
        arclength += dz

        # events inside the step just completed
        seg = _Segment(ops, z_prev, prev.tangent, settings)
        if settings.detect_folds:
            # tau_new is oriented along prev.tangent by _solve_tangent
            f0, f1 = float(prev.tangent[-1]), float(tau_new[-1])
            if f0 * f1 < 0:
                ev = _bisect_fold(ops, seg, h_eff, f0, f1, settings)
                if ev is not None:
                    ev.index = len(points) - 1 + ev.index
                    nfolds += 1
                    events.append(ev)
        if want_pf and ops.want_eigs:
            g0 = _breaking_eig(ops, prev.parity_eigs)
            g1 = _breaking_eig(ops, eigs_new)
            if g0 is not None and g1 is not None and g0 * g1 < 0:
                ev = _bisect_pitchfork(ops, seg, h_eff, g0, g1, settings)
                if ev is not None:
                    ev.index = len(points) - 1 + ev.index
                    events.append(ev)

        points.append(
            _point_from(ops, z_new, tau_new, eigs_new, arclength, nfolds, h_eff, iters)
        )

        # stopping conditions
        mu = float(z_new[-1])
        ns = ops.norm_sq(z_new[:-1])
        if not settings.mu_window[0] <= mu <= settings.mu_window[1]:
            reason = "mu_window"
            break
        if ns > settings.norm_cap:
            reason = "norm_cap"
            break
        if settings.stop_after_folds is not None and nfolds >= settings.stop_after_folds:
            reason = "fold_budget"
            break
        if track_asym:
            measure, best_tag = ops.asymmetry(z_new[:-1]) or (None, None)
            if measure is not None:
                scale = 1.0 + float(np.max(np.abs(z_new[:-1])))
                if measure <= settings.asym_terminate_tol * scale:
                    reason = "symmetry_restored"
                    terminal = {"tag": best_tag, "mu": mu, "measure": measure}
                    break
                if measure < settings.asym_creep_threshold * scale:
                    asym_cap = max(settings.min_step, 0.25 * measure)
                else:
                    asym_cap = math.inf
        if (
            arclength
            >= settings.closure_min_arclength_factor * settings.initial_step
        ):
            first = points[0]
            z_start = np.concatenate([first.state.flat(), [first.mu]])
            if float(np.linalg.norm(z_new - z_start)) <= 2.0 * h_eff + 1e-9:
                # project onto the section through the start point
                z_closed = _closure_projection(
                    ops, z_prev, prev.tangent, z_start, settings, h_eff
                )
                if z_closed is not None and _closure_match(
                    ops, z_closed, first, settings
                ):
                    closed = True
                    reason = "closed"
                    break

        if iters <= settings.fast_corrector_iters:
            h = min(settings.max_step, 2.0 * h)

    branch = Branch(
        points=points,
        events=sorted(events, key=lambda e: e.index),
        classification="segment",
        symmetry=tag,
        truncation_reason=reason,
        closed=closed,
        terminal_info=terminal,
    )
    branch.classification = classify(branch, settings)
    return branch


def classify(branch, settings=None):
    """snake / isola / segment per fold structure and closure."""
    settings = settings or ContinuationSettings()
    if branch.closed and len(branch.points) >= settings.min_points_isola:
        return "isola"
    folds = branch.fold_events
    if len(folds) >= 6:
        ok = True
        for side in ("left", "right"):
            norms = [e.refined_state.norm_sq for e in folds if e.side == side]
            if any(b <= a for a, b in zip(norms, norms[1:])):
                ok = False
        if ok:
            return "snake"
    return "segment"


# ---------------------------------------------------------------------------
# public lattice-level entry points


def trace_branch(problem, start, settings=None, tag=None):
    """Pseudo-arclength trace of the branch through `start` at problem.mu."""
    from . import seeds as _seeds

    settings = settings or ContinuationSettings()
    state = _seeds.refine(problem, start, tol=settings.residual_tol)
    ops = LatticeOps(problem, tag, settings)
    z0 = np.concatenate([state.flat(), [problem.mu]])
    branch = trace_core(ops, z0, settings, tag=tag)
    branch.problem_info = {
        "kind": problem.topology.kind,
        "extent": problem.topology.extent,
        "d": problem.d,
        "mu_start": problem.mu,
    }
    return branch


def detect_fold(problem, point_a, point_b, settings=None, tag=None):
    """Refine a fold bracketed by two consecutive branch points."""
    settings = settings or ContinuationSettings()
    ops = LatticeOps(problem, tag, settings)
    z_a = np.concatenate([point_a.state.flat(), [point_a.mu]])
    seg = _Segment(ops, z_a, point_a.tangent, settings)
    f0, f1 = float(point_a.tangent[-1]), float(point_b.tangent[-1])
    if f0 * f1 >= 0:
        raise RefinementError("no tangent mu sign change across the segment")
    return _bisect_fold(ops, seg, point_b.step_used, f0, f1, settings)


def detect_pitchfork(problem, point_a, point_b, settings=None, tag=None):
    """Refine a pitchfork bracketed by two consecutive branch points."""
    settings = settings or ContinuationSettings()
    ops = LatticeOps(problem, tag, settings)
    if not ops.want_eigs:
        raise RefinementError("pitchfork detection needs a symmetric branch")
    z_a = np.concatenate([point_a.state.flat(), [point_a.mu]])
    seg = _Segment(ops, z_a, point_a.tangent, settings)
    g0 = _breaking_eig(ops, point_a.parity_eigs)
    g1 = _breaking_eig(ops, point_b.parity_eigs)
    if g0 is None or g1 is None or g0 * g1 >= 0:
        raise RefinementError("no breaking-eigenvalue sign change across the segment")
    return _bisect_pitchfork(ops, seg, point_b.step_used, g0, g1, settings)


def switch_branch(problem, event, settings=None, tag=None, eps_rel=1e-3):
    """Start the two asymmetric branches at a pitchfork.

    Solves F(U, mu) = 0 with the constraint phi.(U - U_pf) = +-eps, freeing
    mu; the two solutions are reflections of each other. Raises
    SwitchingError when both predictors fall back onto the symmetric branch
    (after doubling eps up to three times).
    """
    if event.kind != "pitchfork" or event.null_direction is None:
        raise SwitchingError("switching requires a pitchfork event with a null direction")
    settings = settings or ContinuationSettings()
    ops = LatticeOps(problem, tag, settings)
    u_pf = event.refined_state.flat()
    phi = np.asarray(event.null_direction, dtype=float)
    phi = phi / np.linalg.norm(phi)
    base_eps = eps_rel * max(1.0, math.sqrt(float(u_pf @ u_pf)))

    def corrector(eps_signed):
        u = u_pf + eps_signed * phi
        mu = event.mu
        for _ in range(settings.max_corrector_iters + 8):
            st = ops.make_state(u)
            f = model.residual(problem.with_mu(mu), st).flat()
            c = float(phi @ (u - u_pf)) - eps_signed
            if float(np.max(np.abs(f))) <= settings.residual_tol and abs(c) <= 1e-12:
                return st, mu
            jac = ops.jacobian(mu, u)
            col = ops.dmu(u)
            sys = solver.BorderedSystem(
                solver.LinearSystem(jac, -f), phi, 0.0, col, -c
            )
            du, dmu = solver.solve_bordered(sys)
            u = u + du
            mu = mu + dmu
        raise RefinementError("switch corrector failed")

    eps = base_eps
    for _ in range(4):
        try:
            st_plus, mu_plus = corrector(+eps)
            st_minus, mu_minus = corrector(-eps)
        except (RefinementError, SingularSystemError, DegenerateBorderError):
            eps *= 2.0
            continue
        meas_p = ops.asymmetry(st_plus.flat())
        meas_m = ops.asymmetry(st_minus.flat())
        thresh = 0.1 * eps
        if (
            meas_p is not None
            and meas_m is not None
            and meas_p[0] > thresh
            and meas_m[0] > thresh
        ):
            return (st_plus, mu_plus), (st_minus, mu_minus)
        eps *= 2.0
    raise SwitchingError("both predictors fell back onto the symmetric branch")


def trace_ladder(problem, switched, settings=None, base_tag=None, direction=None):
    """Trace an asymmetric branch from a switched state until symmetry returns.

    Heads into the branch interior (away from the originating pitchfork);
    if the first attempt immediately terminates back at the start, the
    opposite direction is traced instead.
    """
    settings = settings or ContinuationSettings()
    state, mu = switched
    tag = model.SymmetryTag(
        "asymmetric",
        base_tag.center2 if base_tag is not None else 0,
        1,
    )
    prob = problem.with_mu(mu)
    if direction is None:
        direction = 1.0 if mu <= model.maxwell_point() else -1.0
    s = settings.updated(
        detect_folds=False,
        detect_pitchforks=False,
        compute_parity_eigs=False,
        max_step=min(settings.max_step, 0.05),
        direction=direction,
    )
    ops = LatticeOps(prob, tag, s)
    z0 = np.concatenate([state.flat(), [mu]])
    branch = trace_core(ops, z0, s, tag=tag)
    if (
        branch.truncation_reason == "symmetry_restored"
        and abs(branch.terminal_info.get("mu", mu) - mu) < 1e-3
        and branch.points[-1].arclength < 20 * s.initial_step
    ):
        branch = trace_core(ops, z0, s.updated(direction=-direction), tag=tag)
    branch.problem_info = {
        "kind": problem.topology.kind,
        "extent": problem.topology.extent,
        "d": problem.d,
        "mu_start": mu,
    }
    return branch


# ---------------------------------------------------------------------------
# isola tracking in the coupling


@dataclass
class IsolaScanReport:
    tested: list
    last_good: Optional[float]
    first_bad: Optional[float]
    d_star: Optional[float]

    @property
    def lost(self):
        return self.first_bad is not None


def _isola_at(problem_template, d, warm_state, warm_mu, settings, tag, prev_arclength=None):
    prob = model.Problem(problem_template.topology, d, warm_mu)
    if prev_arclength is not None:
        # shrinking isolas need steps small enough to resolve the circuit
        settings = settings.updated(
            initial_step=min(settings.initial_step, max(prev_arclength / 40.0, 1e-5)),
            max_step=min(settings.max_step, max(prev_arclength / 10.0, 1e-4)),
        )
    try:
        branch = trace_branch(prob, warm_state, settings, tag=tag)
    except (RefinementError, SingularSystemError, DegenerateBorderError):
        return None
    if branch.classification != "isola":
        return None
    return branch


def _isola_representative(branch):
    """A point in the middle of the isola's mu-range, away from folds."""
    mus = np.array([p.mu for p in branch.points])
    mid = 0.5 * (mus.min() + mus.max())
    k = int(np.argmin(np.abs(mus - mid)))
    return branch.points[k].state, branch.points[k].mu


def scan_isola_in_d(problem_template, seed_state, tag, d_values, settings=None, bisect_tol=2e-3):
    """Track an isola upward in d; report where it is lost (if it is).

    Warm-starts each d from a representative state of the previous isola,
    then bisects between the last good and first bad coupling.
    """
    settings = settings or ContinuationSettings()
    warm_state, warm_mu = seed_state, problem_template.mu
    tested = []
    last_good = None
    first_bad = None
    arc = None
    for d in d_values:
        branch = _isola_at(problem_template, d, warm_state, warm_mu, settings, tag, arc)
        ok = branch is not None
        tested.append((d, ok))
        if ok:
            last_good = d
            warm_state, warm_mu = _isola_representative(branch)
            arc = branch.points[-1].arclength
        else:
            first_bad = d
            break
    if first_bad is not None and last_good is not None:
        lo, hi = last_good, first_bad
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            branch = _isola_at(problem_template, mid, warm_state, warm_mu, settings, tag, arc)
            tested.append((mid, branch is not None))
            if branch is not None:
                lo = mid
                warm_state, warm_mu = _isola_representative(branch)
                arc = branch.points[-1].arclength
            else:
                hi = mid
        return IsolaScanReport(tested, lo, hi, d_star=0.5 * (lo + hi))
    return IsolaScanReport(tested, last_good, first_bad, d_star=None)
