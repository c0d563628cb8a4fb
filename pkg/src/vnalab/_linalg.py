"""Small dense linear-algebra helpers shared by every module.

All matrices are complex ``numpy`` arrays. Hermitian spectral functions go
through :func:`numpy.linalg.eigh`; eigenvalues below ``ZERO_EIG`` count as
exact zeros for support computations.
"""

import numpy as np

ZERO_EIG = 1e-12
CLAMP_EIG = 1e-14
STRUCT_TOL = 1e-10


def herm(x):
    return 0.5 * (x + x.conj().T)


def dag(x):
    return x.conj().T


def eigh(x):
    w, v = np.linalg.eigh(herm(x))
    return w, v


def spectral_apply(x, fun, clamp=CLAMP_EIG):
    """Apply ``fun`` to the positive part of the spectrum of hermitian ``x``.

    Eigenvalues below ``clamp`` are mapped to zero, never passed to ``fun``.
    """
    w, v = eigh(x)
    fw = np.zeros_like(w)
    keep = w > clamp
    fw[keep] = fun(w[keep])
    return (v * fw) @ dag(v)


def psd_power(x, power, clamp=CLAMP_EIG):
    return spectral_apply(x, lambda w: w ** power, clamp)


def psd_sqrt(x):
    return psd_power(x, 0.5)


def psd_log(x, clamp=CLAMP_EIG):
    """Logarithm on the support; zero on the kernel."""
    return spectral_apply(x, np.log, clamp)


def support_projection(x, tol=ZERO_EIG):
    w, v = eigh(x)
    vs = v[:, w > tol]
    return vs @ dag(vs)


def pos_part(x):
    w, v = eigh(x)
    return (v * np.clip(w, 0.0, None)) @ dag(v)


def neg_part(x):
    w, v = eigh(x)
    return (v * np.clip(-w, 0.0, None)) @ dag(v)


def trace_norm(x):
    return float(np.sum(np.linalg.svd(x, compute_uv=False)))


def op_norm(x):
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def is_unitary(u, tol=STRUCT_TOL):
    n = u.shape[1]
    return op_norm(dag(u) @ u - np.eye(n)) <= tol


def eta(t):
    """Information function ``-t ln t`` with ``eta(0) = 0``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = -t[pos] * np.log(t[pos])
    if out.ndim == 0:
        return float(out)
    return out


def entropy_of_spectrum(w):
    w = np.asarray(w, dtype=float)
    w = np.where(np.abs(w) <= ZERO_EIG, 0.0, w)
    return float(np.sum(eta(np.clip(w, 0.0, None))))


def divided_differences(w, fun, dfun):
    """First divided-difference matrix of ``fun`` at eigenvalues ``w``."""
    wi = w[:, None]
    wj = w[None, :]
    diff = wi - wj
    fw = fun(w)
    num = fw[:, None] - fw[None, :]
    close = np.abs(diff) < 1e-9 * np.maximum(1.0, np.abs(wi))
    safe = np.where(close, 1.0, diff)
    out = np.where(close, dfun(0.5 * (wi + wj)), num / safe)
    return out


def frechet_adjoint(x, h, fun, dfun):
    """Adjoint Frechet derivative of the spectral function ``fun`` at ``x``
    applied to ``h``. The map is self-adjoint for the trace pairing."""
    w, v = eigh(x)
    gamma = divided_differences(w, fun, dfun)
    return v @ (gamma * (dag(v) @ h @ v)) @ dag(v)


def partial_trace(rho, dims, keep):
    """Partial trace of ``rho`` on ``C^{d_0} x C^{d_1} x ...`` keeping ``keep``."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    t = rho.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for count, i in enumerate(sorted(drop, reverse=True)):
        cur = n - count
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def orthonormal_columns(m, tol=1e-9):
    """Orthonormal basis of the column span of ``m`` (SVD, relative cutoff)."""
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :r]


def null_space(m, tol=1e-9):
    """Orthonormal basis of the kernel of ``m``."""
    # tall matrices already give a square vh in the economy factorisation
    _, s, vh = np.linalg.svd(m, full_matrices=m.shape[0] < m.shape[1])
    scale = max(1.0, s[0]) if s.size else 1.0
    r = int(np.sum(s > tol * scale))
    return dag(vh[r:])


def subspace_projector(cols):
    q = orthonormal_columns(cols)
    return q @ dag(q)


def vec(x):
    return np.asarray(x).reshape(-1)


def unvec(v, n):
    return np.asarray(v).reshape(n, n)


def random_density(rng, n, rank=None):
    """Full-rank (or given-rank) density matrix: ``G G^*`` normalised."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure(rng, n):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)
