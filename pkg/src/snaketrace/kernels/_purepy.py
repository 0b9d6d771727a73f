"""Pure numpy/scipy implementations of the hot kernels.

Same call surface as the compiled module `_native`; used when the extension
is unavailable or when SNAKETRACE_KERNELS=python.
"""

import numpy as np
from scipy.linalg import lapack as _lapack


# ---------------------------------------------------------------------------
# lattice stencils (zero Dirichlet exterior)

def chain_residual(u, d, mu):
    """d*(u[n+1]+u[n-1]-2u[n]) - mu*u + 2u^3 - u^5 with zero exterior."""
    u = np.asarray(u, dtype=float)
    r = np.empty_like(u)
    r[:] = -2.0 * d * u
    r[:-1] += d * u[1:]
    r[1:] += d * u[:-1]
    u2 = u * u
    r += u * (-mu + u2 * (2.0 - u2))
    return r


def chain_jacobian_diag(u, d, mu):
    u = np.asarray(u, dtype=float)
    u2 = u * u
    return -2.0 * d - mu + u2 * (6.0 - 5.0 * u2)


def square_residual(u, d, mu):
    """5-point stencil residual on a 2-D block, zero exterior."""
    u = np.asarray(u, dtype=float)
    r = -4.0 * d * u
    r[:-1, :] += d * u[1:, :]
    r[1:, :] += d * u[:-1, :]
    r[:, :-1] += d * u[:, 1:]
    r[:, 1:] += d * u[:, :-1]
    u2 = u * u
    r += u * (-mu + u2 * (2.0 - u2))
    return r


def square_jacobian_diag(u, d, mu):
    u = np.asarray(u, dtype=float)
    u2 = u * u
    return -4.0 * d - mu + u2 * (6.0 - 5.0 * u2)


def chain_energy(u, d, mu):
    """Bond + on-site potential energy, bonds to the zero exterior included."""
    u = np.asarray(u, dtype=float)
    du = np.diff(u)
    bonds = float(du @ du) + u[0] ** 2 + u[-1] ** 2
    u2 = u * u
    site = float(np.sum(u2 * (0.5 * mu + u2 * (-0.5 + u2 / 6.0))))
    return 0.5 * d * bonds + site


def square_energy(u, d, mu):
    u = np.asarray(u, dtype=float)
    dx = np.diff(u, axis=0)
    dy = np.diff(u, axis=1)
    bonds = float(np.sum(dx * dx) + np.sum(dy * dy))
    bonds += float(np.sum(u[0, :] ** 2) + np.sum(u[-1, :] ** 2))
    bonds += float(np.sum(u[:, 0] ** 2) + np.sum(u[:, -1] ** 2))
    u2 = u * u
    site = float(np.sum(u2 * (0.5 * mu + u2 * (-0.5 + u2 / 6.0))))
    return 0.5 * d * bonds + site


# ---------------------------------------------------------------------------
# tridiagonal LU with partial pivoting (LAPACK gttrf/gttrs)

def tridiag_factor(dl, dd, du):
    """Factor a tridiagonal matrix; returns (factors, min_pivot)."""
    n = len(dd)
    if n == 1:
        # LAPACK rejects n<2 paths inconsistently across builds; trivial case
        ddf = np.asarray(dd, dtype=float).copy()
        return ("scalar", ddf), abs(float(ddf[0]))
    dlf, ddf, duf, du2, ipiv, info = _lapack.dgttrf(dl, dd, du)
    if info < 0:
        raise ValueError(f"dgttrf: illegal argument {-info}")
    min_pivot = float(np.min(np.abs(ddf)))
    return ("gt", dlf, ddf, duf, du2, ipiv), min_pivot


def tridiag_solve(factor, b):
    if factor[0] == "scalar":
        return np.asarray(b, dtype=float) / factor[1][0]
    _, dlf, ddf, duf, du2, ipiv = factor
    b = np.ascontiguousarray(b, dtype=float)
    x, info = _lapack.dgttrs(dlf, ddf, duf, du2, ipiv, b)
    if info != 0:
        raise ValueError(f"dgttrs: info={info}")
    return x


# ---------------------------------------------------------------------------
# semi-implicit gradient-flow steps for the chain

def chain_relax(u, d, mu, dt, nsteps, record_energy=False):
    """nsteps of (I - dt*(d*Lap - mu))u' = u + dt*(2u^3 - u^5).

    The linear part (coupling and the mu term) is implicit, the genuine
    nonlinearity explicit. Returns (u_final, energies or None); energies has
    nsteps+1 entries starting with the initial energy.
    """
    u = np.asarray(u, dtype=float).copy()
    n = len(u)
    diag = np.full(n, 1.0 + dt * (2.0 * d + mu))
    off = np.full(n - 1, -dt * d)
    factor, _ = tridiag_factor(off, diag, off.copy())
    energies = None
    if record_energy:
        energies = np.empty(nsteps + 1)
        energies[0] = chain_energy(u, d, mu)
    for k in range(nsteps):
        u2 = u * u
        rhs = u + dt * (u * u2 * (2.0 - u2))
        u = tridiag_solve(factor, rhs)
        if record_energy:
            energies[k + 1] = chain_energy(u, d, mu)
    return u, energies


# ---------------------------------------------------------------------------
# planar map orbits

MAP_CLIP = 1e8  # escape saturation; anything this large is already "outside"


def map_iterate(points, mu, d, nsteps, inverse=False):
    """Apply the steady-state plane map (or its inverse) nsteps times.

    points: array (m, 2) of (u, v) pairs; returns a new (m, 2) array.
    Escaping orbits saturate at MAP_CLIP so batches never overflow.
    """
    pts = np.array(points, dtype=float, copy=True).reshape(-1, 2)
    u = pts[:, 0]
    v = pts[:, 1]
    inv_d = 1.0 / d
    for _ in range(nsteps):
        if not inverse:
            v2 = v * v
            vn = 2.0 * v - u + inv_d * v * (mu - v2 * (2.0 - v2))
            u, v = v.copy(), vn
        else:
            u2 = u * u
            un = 2.0 * u - v + inv_d * u * (mu - u2 * (2.0 - u2))
            u, v = un, u.copy()
        np.clip(u, -MAP_CLIP, MAP_CLIP, out=u)
        np.clip(v, -MAP_CLIP, MAP_CLIP, out=v)
    out = np.empty_like(pts)
    out[:, 0] = u
    out[:, 1] = v
    return out
