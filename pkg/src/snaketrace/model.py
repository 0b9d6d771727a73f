"""Bistable lattice models: residuals, Jacobians, energy, symmetries.

The governing on-site reaction is -mu*u + 2u^3 - u^5 with nearest-neighbour
diffusive coupling of strength d, on a truncated chain (indices -N..N) or
square block ((-N..N)^2) with zero exterior values.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .bandops import BandedOperator
from .errors import (
    CapacityError,
    DomainError,
    ShapeError,
    UnsupportedTopologyError,
)

MIN_EXTENT = 8


@dataclass(frozen=True)
class LatticeTopology:
    kind: str  # "chain" | "square"
    extent: int

    def __post_init__(self):
        if self.kind not in ("chain", "square"):
            raise DomainError(f"unknown topology kind {self.kind!r}")
        if self.extent < MIN_EXTENT:
            raise DomainError(
                f"extent {self.extent} < {MIN_EXTENT}: localized tails need room to decay"
            )

    @property
    def side(self):
        """Number of sites along one axis."""
        return 2 * self.extent + 1

    @property
    def shape(self):
        return (self.side,) if self.kind == "chain" else (self.side, self.side)

    @property
    def site_count(self):
        return self.side if self.kind == "chain" else self.side * self.side

    def indices(self):
        """Lattice indices along one axis, -N..N."""
        return np.arange(-self.extent, self.extent + 1)


def chain(extent):
    return LatticeTopology("chain", extent)


def square(extent):
    return LatticeTopology("square", extent)


@dataclass(frozen=True)
class Problem:
    topology: LatticeTopology
    d: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.d) and math.isfinite(self.mu)):
            raise DomainError("d and mu must be finite")

    def with_mu(self, mu):
        return replace(self, mu=float(mu))

    def with_d(self, d):
        return replace(self, d=float(d))


@dataclass(frozen=True)
class LatticeState:
    topology: LatticeTopology
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.topology.shape:
            raise ShapeError(
                f"values shape {vals.shape} does not match topology {self.topology.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("state contains non-finite values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, topology):
        return cls(topology, np.zeros(topology.shape))

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def norm_sq(self):
        v = self.values.ravel()
        return float(v @ v)

    def flat(self):
        """Row-major flattened copy (the linear-algebra ordering)."""
        return self.values.ravel().copy()

    def with_flat(self, flat):
        return LatticeState(self.topology, np.asarray(flat, dtype=float).reshape(self.topology.shape))


@dataclass(frozen=True)
class SymmetryTag:
    """Reflection symmetry of a profile.

    center2 is twice the reflection center, so integer centers (onsite) and
    half-integer centers (offsite) are both integral. sign=-1 marks symmetry
    under reflection composed with the global flip U -> -U, which is how
    even-length oscillatory plateaus are symmetric.
    """

    kind: str  # "onsite" | "offsite" | "asymmetric" | "none"
    center2: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("onsite", "offsite", "asymmetric", "none"):
            raise DomainError(f"unknown symmetry kind {self.kind!r}")
        if self.kind == "onsite" and self.center2 % 2 != 0:
            raise DomainError("onsite symmetry requires an integer center")
        if self.kind == "offsite" and self.center2 % 2 == 0:
            raise DomainError("offsite symmetry requires a half-integer center")
        if self.sign not in (-1, 1):
            raise DomainError("sign must be +-1")

    @property
    def symmetric(self):
        return self.kind in ("onsite", "offsite")


# ---------------------------------------------------------------------------
# pointwise reaction and homogeneous states

def nonlinearity(u, mu):
    """-mu*u + 2u^3 - u^5."""
    u = np.asarray(u, dtype=float)
    out = u * (-mu + u * u * (2.0 - u * u))
    return float(out) if out.ndim == 0 else out


def nonlinearity_deriv(u, mu):
    """-mu + 6u^2 - 5u^4."""
    u = np.asarray(u, dtype=float)
    out = -mu + u * u * (6.0 - 5.0 * u * u)
    return float(out) if out.ndim == 0 else out


def _polish_root(u, mu):
    """A Newton step or two onto the nearest float root of the reaction."""
    best = u
    fbest = abs(nonlinearity(best, mu))
    for _ in range(2):
        fp = nonlinearity_deriv(u, mu)
        if fp == 0.0:
            break
        u = u - nonlinearity(u, mu) / fp
        f = abs(nonlinearity(u, mu))
        if f < fbest:
            best, fbest = u, f
        if fbest == 0.0:
            break
    return best


def upper_state(mu):
    """U_+(mu) = sqrt(1 + sqrt(1 - mu)); defined for mu <= 1."""
    if mu > 1.0:
        raise DomainError("upper state requires mu <= 1")
    return _polish_root(math.sqrt(1.0 + math.sqrt(1.0 - mu)), mu)


def lower_state(mu):
    """U_-(mu) = sqrt(1 - sqrt(1 - mu)); defined for 0 <= mu <= 1."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError("lower state requires 0 <= mu <= 1")
    if mu == 0.0:
        return 0.0
    return _polish_root(math.sqrt(1.0 - math.sqrt(1.0 - mu)), mu)


def homogeneous_equilibria(mu):
    """The five spatially homogeneous steady states, sorted ascending."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError("homogeneous equilibria catalogued for 0 <= mu <= 1")
    up = upper_state(mu)
    lo = lower_state(mu)
    return [-up, -lo, 0.0, lo, up]


# ---------------------------------------------------------------------------
# residual / Jacobian / energy

def residual(problem, state):
    """Componentwise steady-state residual with zero exterior values."""
    if state.topology != problem.topology:
        raise ShapeError("state does not conform to problem topology")
    if problem.topology.kind == "chain":
        vals = kernels.chain_residual(state.values, problem.d, problem.mu)
    else:
        vals = kernels.square_residual(state.values, problem.d, problem.mu)
    return LatticeState(problem.topology, vals)


def jacobian(problem, state):
    """Banded linearization of the residual at `state`."""
    if state.topology != problem.topology:
        raise ShapeError("state does not conform to problem topology")
    d = problem.d
    if problem.topology.kind == "chain":
        diag = kernels.chain_jacobian_diag(state.values, d, problem.mu)
        n = len(diag)
        off = np.full(n - 1, d)
        return BandedOperator.tridiagonal(off, diag, off)
    m = problem.topology.side
    diag = kernels.square_jacobian_diag(state.values, d, problem.mu).ravel()
    n = diag.size
    bands = np.zeros((2 * m + 1, n))
    bands[m, :] = diag
    # horizontal neighbours: offset +-1 within a row of the block
    col = np.arange(n)
    bands[m - 1, col[col % m != 0]] = d
    bands[m + 1, col[col % m != m - 1][: n - 1]] = d
    # vertical neighbours: offset +-m
    bands[0, m:] = d
    bands[2 * m, : n - m] = d
    return BandedOperator(bands, m, m)


def dresidual_dmu(state):
    """Partial derivative of the residual w.r.t. mu: -U componentwise."""
    return -state.flat()


def per_cell_potential(u, mu):
    """On-site potential (mu/2)u^2 - (1/2)u^4 + (1/6)u^6."""
    u2 = u * u
    return u2 * (0.5 * mu + u2 * (-0.5 + u2 / 6.0))


def energy(problem, state):
    """Gradient-flow energy; bonds to the zero exterior included."""
    if state.topology != problem.topology:
        raise ShapeError("state does not conform to problem topology")
    if problem.topology.kind == "chain":
        return kernels.chain_energy(state.values, problem.d, problem.mu)
    return kernels.square_energy(state.values, problem.d, problem.mu)


_MAXWELL_CACHE = {}


def maxwell_point():
    """mu at which the upper homogeneous state has zero per-cell potential.

    Bracketed bisection on (0, 1); the exact value for this nonlinearity
    is 0.75.
    """
    if "mu" in _MAXWELL_CACHE:
        return _MAXWELL_CACHE["mu"]

    def pot(mu):
        return per_cell_potential(upper_state(mu), mu)

    lo, hi = 1e-8, 1.0 - 1e-8
    flo = pot(lo)
    if flo * pot(hi) > 0:
        raise DomainError("maxwell point bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = pot(mid)
        if fmid == 0.0 or hi - lo < 1e-14:
            lo = hi = mid
            break
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    mu = 0.5 * (lo + hi)
    _MAXWELL_CACHE["mu"] = mu
    return mu


# ---------------------------------------------------------------------------
# staggering symmetry

def stagger(problem, state):
    """Map (d, mu, U) to (-d, mu+4d, (-1)^n U).

    Exact symmetry of the chain system: the residual of the image equals
    (-1)^n times the original residual componentwise. Applying it twice is
    the identity.
    """
    if problem.topology.kind != "chain":
        raise UnsupportedTopologyError("staggering is a chain symmetry")
    n = problem.topology.indices()
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    new_problem = Problem(problem.topology, -problem.d, problem.mu + 4.0 * problem.d)
    return new_problem, LatticeState(problem.topology, signs * state.values)


def stagger_signs(topology):
    if topology.kind != "chain":
        raise UnsupportedTopologyError("staggering is a chain symmetry")
    n = topology.indices()
    return np.where(n % 2 == 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# gradient-flow time stepping

def stability_dt_bound(amplitude=1.3):
    """Step-size bound for the explicit part, 2 / max|6u^2 - 5u^4|.

    The coupling and the mu term are implicit, so only the cubic-quintic
    part limits dt. Valid while |U| stays below `amplitude`.
    """
    interior = 1.8  # |6u^2-5u^4| at u^2 = 3/5
    edge = abs(6.0 * amplitude**2 - 5.0 * amplitude**4)
    return 2.0 / max(interior, edge)


def relax(problem, state, dt, nsteps, record_energy=False):
    """Semi-implicit gradient-flow steps; returns (state, energies|None)."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    if state.topology != problem.topology:
        raise ShapeError("state does not conform to problem topology")
    if problem.topology.kind == "chain":
        vals, energies = kernels.chain_relax(
            state.values, problem.d, problem.mu, dt, nsteps, record_energy
        )
        return LatticeState(problem.topology, vals), energies
    return _relax_square(problem, state, dt, nsteps, record_energy)


def _relax_square(problem, state, dt, nsteps, record_energy):
    from .bandops import factorize

    m = problem.topology.side
    n = m * m
    d, mu = problem.d, problem.mu
    bands = np.zeros((2 * m + 1, n))
    bands[m, :] = 1.0 + dt * (4.0 * d + mu)
    col = np.arange(n)
    bands[m - 1, col[col % m != 0]] = -dt * d
    bands[m + 1, col[col % m != m - 1][: n - 1]] = -dt * d
    bands[0, m:] = -dt * d
    bands[2 * m, : n - m] = -dt * d
    fac = factorize(BandedOperator(bands, m, m))
    u = state.values.ravel().copy()
    energies = np.empty(nsteps + 1) if record_energy else None
    if record_energy:
        energies[0] = kernels.square_energy(u.reshape(m, m), d, mu)
    for k in range(nsteps):
        u2 = u * u
        rhs = u + dt * (u * u2 * (2.0 - u2))
        u = fac.solve(rhs)
        if record_energy:
            energies[k + 1] = kernels.square_energy(u.reshape(m, m), d, mu)
    return LatticeState(problem.topology, u.reshape(m, m)), energies


def time_step(problem, state, dt):
    """One semi-implicit step of the gradient flow."""
    return relax(problem, state, dt, 1)[0]


# ---------------------------------------------------------------------------
# reflections and symmetry measures

def reflection_positions(topology, tag):
    """Partner array position for every position under the tag's reflection.

    Returns (partner, closed): partner[p] = q with q = -1 where the
    reflected index leaves the window (possible for half-integer centers);
    closed is the boolean mask of positions whose partner exists.
    """
    if topology.kind == "chain":
        ext = topology.extent
        p = np.arange(topology.side)
        q = tag.center2 + 2 * ext - p
        closed = (q >= 0) & (q < topology.side)
        partner = np.where(closed, q, -1)
        return partner, closed
    if tag.kind != "onsite" or tag.center2 != 0:
        raise UnsupportedTopologyError("square reflections: central point reflection only")
    m = topology.side
    p = np.arange(m * m)
    i, j = divmod(p, m)
    q = (m - 1 - i) * m + (m - 1 - j)
    return q, np.ones(m * m, dtype=bool)


def reflect_values(state, tag):
    """Apply the tagged reflection; out-of-window preimages read as zero."""
    flat = state.flat()
    partner, closed = reflection_positions(state.topology, tag)
    out = np.zeros_like(flat)
    out[closed] = tag.sign * flat[partner[closed]]
    return out


def symmetry_residual(state, tag):
    """Sup-norm distance between the state and its tagged reflection."""
    if not tag.symmetric:
        raise DomainError("symmetry residual needs an onsite/offsite tag")
    return float(np.max(np.abs(state.flat() - reflect_values(state, tag))))


def asymmetry_measure(state, base_tag, center_radius=2):
    """Distance to the nearest symmetric profile over nearby centers/signs.

    Returns (measure, best_tag). Used to terminate asymmetric (ladder)
    branches, whose endpoints are symmetric with a center shifted by a
    half step relative to the branch they bifurcated from.
    """
    best = (math.inf, None)
    if state.topology.kind == "square":
        candidates = [SymmetryTag("onsite", 0, s) for s in (1, -1)]
    else:
        candidates = []
        for dc in range(-center_radius, center_radius + 1):
            c2 = base_tag.center2 + dc
            kind = "onsite" if c2 % 2 == 0 else "offsite"
            for s in (1, -1):
                candidates.append(SymmetryTag(kind, c2, s))
    for tag in candidates:
        r = symmetry_residual(state, tag)
        if r < best[0]:
            best = (r, tag)
    return best


def closed_window_positions(topology, tag):
    """Positions forming the reflection-invariant index set.

    For half-integer chain centers one tail site has no partner and is
    dropped (its amplitude is exterior-level); integer centers and the
    square point reflection keep the full window.
    """
    partner, closed = reflection_positions(topology, tag)
    keep = np.flatnonzero(closed)
    return keep, partner


# ---------------------------------------------------------------------------
# profile diagnostics

def plateau_length(state, mu, rel_tol=0.1):
    """Number of sites within rel_tol*U_+ of the upper state (in magnitude)."""
    up = upper_state(mu)
    return int(np.sum(np.abs(np.abs(state.values) - up) <= rel_tol * up))


def suggest_chain_extent(plateau, d, mu_min, target=1e-14, minimum=MIN_EXTENT):
    """Window half-width so the boundary residual stays below target.

    Tail decay per site is the stable multiplier of the origin saddle,
    1/lambda with lambda from trace 2 + mu/d; extent = plateau half-width
    plus enough decay sites plus margin.
    """
    t = 2.0 + abs(mu_min / d) if d != 0 else math.inf
    if not math.isfinite(t) or t <= 2.0:
        decay_sites = 40
    else:
        lam = 0.5 * (t + math.sqrt(t * t - 4.0))
        decay_sites = int(math.ceil(-math.log(target) / math.log(lam))) + 4
    return max(minimum, plateau // 2 + 1 + decay_sites + 10)
