"""Electronic phase-space machinery: CPS samplers, triangle windows, mapping
kernels, commutator matrices, quasi-density matrices, and window weights.

Electronic mapping variables are carried as complex vectors g = x + i p; the
action of state k is e_k = |g_k|^2 / 2.  Functions accept either a single
vector (F,) or a batch (B, F).
"""

import math

import numpy as np

SERIES_RTOL = 1e-14
SERIES_MAX_TERMS = 10_000


def actions(g):
    """Action variables e_k = ((x_k)^2 + (p_k)^2)/2 from complex mapping variables."""
    g = np.asarray(g)
    return 0.5 * (g.real**2 + g.imag**2)


# ---------------------------------------------------------------------------
# samplers


def _check_gamma(nstates, gamma):
    if gamma <= -1.0 / nstates:
        raise ValueError(f"gamma must exceed -1/F = {-1.0 / nstates}")


def sample_cps(nstates, gamma, rng):
    """Uniform point on the mapping sphere sum_k e_k = 1 + F*gamma."""
    _check_gamma(nstates, gamma)
    xi = rng.standard_normal(2 * nstates)
    xi /= np.linalg.norm(xi)
    scale = math.sqrt(2.0 * (1.0 + nstates * gamma))
    return scale * (xi[:nstates] + 1j * xi[nstates:])


def sample_cps_many(nstates, gamma, rng, n):
    _check_gamma(nstates, gamma)
    xi = rng.standard_normal((n, 2 * nstates))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    scale = math.sqrt(2.0 * (1.0 + nstates * gamma))
    return scale * (xi[:, :nstates] + 1j * xi[:, nstates:])


def _draw_zeta(rng):
    # accept-reject pair: keep zeta when zeta + zeta2 < 1, giving density 2(1-z)
    while True:
        zeta, zeta2 = rng.random(2)
        if zeta + zeta2 < 1.0:
            return zeta


def sample_tw(nstates, j_occ, rng):
    """Triangle-window initial actions: e_occ = 1 + zeta, others uniform on
    [0, 1 - zeta]; all angles uniform.  Returns complex mapping variables."""
    if not 0 <= j_occ < nstates:
        raise ValueError("occupied state out of range")
    zeta = _draw_zeta(rng)
    e = np.empty(nstates)
    e[j_occ] = 1.0 + zeta
    if nstates > 1:
        others = rng.random(nstates - 1) * (1.0 - zeta)
        e[np.arange(nstates) != j_occ] = others
    theta = rng.random(nstates) * (2.0 * np.pi)
    return np.sqrt(2.0 * e) * np.exp(1j * theta)


def sample_tw_many(nstates, j_occ, rng, n):
    zeta = np.empty(n)
    need = np.ones(n, dtype=bool)
    while need.any():
        k = int(need.sum())
        z = rng.random((k, 2))
        ok = z[:, 0] + z[:, 1] < 1.0
        idx = np.flatnonzero(need)[ok]
        zeta[idx] = z[ok, 0]
        need[idx] = False
    e = np.empty((n, nstates))
    e[:, j_occ] = 1.0 + zeta
    if nstates > 1:
        others = rng.random((n, nstates - 1)) * (1.0 - zeta)[:, None]
        mask = np.arange(nstates) != j_occ
        e[:, mask] = others
    theta = rng.random((n, nstates)) * (2.0 * np.pi)
    return np.sqrt(2.0 * e) * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# windows


def window_point(e, n):
    """Initial-occupation triangle window: 1 <= e_n <= 2 and e_k + e_n <= 2."""
    e = np.asarray(e, float)
    en = e[..., n]
    ok = (en >= 1.0) & (en <= 2.0)
    others = np.delete(e, n, axis=-1)
    if others.shape[-1]:
        ok &= np.all(others + en[..., None] <= 2.0, axis=-1)
    return ok if ok.ndim else bool(ok)


def window_bin(e, m):
    """Time-t population bin: e_m >= 1 and e_k <= 1 for all k != m."""
    e = np.asarray(e, float)
    ok = e[..., m] >= 1.0
    others = np.delete(e, m, axis=-1)
    if others.shape[-1]:
        ok &= np.all(others <= 1.0, axis=-1)
    return ok if ok.ndim else bool(ok)


def window_bin_assign(e):
    """Bin index per sample, -1 when no bin applies.

    Boundary ties (two actions exactly 1) go to the lowest state index, which
    argmax already guarantees.
    """
    e = np.atleast_2d(np.asarray(e, float))
    top = np.argmax(e, axis=1)
    etop = np.take_along_axis(e, top[:, None], axis=1)[:, 0]
    rest = e.copy()
    np.put_along_axis(rest, top[:, None], -np.inf, axis=1)
    ok = (etop >= 1.0) & (np.max(rest, axis=1) <= 1.0)
    return np.where(ok, top, -1)


# ---------------------------------------------------------------------------
# kernels and densities


def kernel_cmm(g, l, k):
    """Mapping-kernel element (1/2)(x_l + i p_l)(x_k - i p_k)."""
    g = np.asarray(g)
    return 0.5 * g[..., l] * np.conj(g[..., k])


def gamma_init(g, j_occ):
    """Diagonal initial commutator matrix: Gamma_nn = e_n - delta(n, j_occ)."""
    e = actions(g)
    gam = e.astype(complex)
    gam[..., j_occ] -= 1.0
    if e.ndim == 1:
        return np.diag(gam)
    out = np.zeros(e.shape + (e.shape[-1],), dtype=complex)
    idx = np.arange(e.shape[-1])
    out[..., idx, idx] = gam
    return out


def quasi_density_tw(g):
    """Window-representation quasi-density: (1 + F/3) g g^dag / tr - 1/3."""
    g = np.asarray(g)
    F = g.shape[-1]
    nrm = np.sum(g.real**2 + g.imag**2, axis=-1)
    if np.any(nrm < 1e-300):
        raise ValueError("degenerate mapping state: |g| ~ 0")
    gg = g[..., :, None] * np.conj(g[..., None, :])
    rho = (1.0 + F / 3.0) * gg / nrm[..., None, None]
    idx = np.arange(F)
    rho[..., idx, idx] -= 1.0 / 3.0
    return rho


def quasi_density_gamma(g, Gamma):
    """Commutator-offset quasi-density: g g^dag / 2 - Gamma."""
    g = np.asarray(g)
    gg = g[..., :, None] * np.conj(g[..., None, :])
    return 0.5 * gg - np.asarray(Gamma)


# ---------------------------------------------------------------------------
# weights and normalizations


def weight_sqc(e, n, nstates):
    """Window weight (2(F^F - 1)/(F F!)) (2 - e_n)^(2-F); diverges at e_n = 2."""
    e = np.asarray(e, float)
    en = e[..., n]
    if np.any(en >= 2.0):
        raise ValueError("weight is singular at e_n >= 2")
    pref = 2.0 * (nstates**nstates - 1.0) / (nstates * math.factorial(nstates))
    return pref * (2.0 - en) ** (2 - nstates)


def cps_normalization(nstates, gamma):
    """Surface normalization (2 pi)^F (1 + F gamma)^(F-1) / (F-1)!."""
    _check_gamma(nstates, gamma)
    return ((2.0 * np.pi) ** nstates
            * (1.0 + nstates * gamma) ** (nstates - 1)
            / math.factorial(nstates - 1))


def gamma_weight(nstates, gamma):
    """Quasi-distribution of the sphere parameter on [0, 1 - 1/F]:
    w(gamma) = F^2/(F^F - 1) (1 + F gamma)^(F-1); integrates to one."""
    gamma = np.asarray(gamma, float)
    if np.any(gamma < 0) or np.any(gamma > 1.0 - 1.0 / nstates):
        raise ValueError("gamma outside [0, 1 - 1/F]")
    return (nstates**2 / (nstates**nstates - 1.0)
            * (1.0 + nstates * gamma) ** (nstates - 1))


def hyp_series(nstates, z):
    """Power series of the regularized 2F1(1, 1; F+1; z), elementwise for z < 1."""
    z = np.asarray(z, float)
    if np.any(z >= 1.0):
        raise ValueError("hypergeometric series requires z < 1")
    c = nstates + 1
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, SERIES_MAX_TERMS + 1):
        term = term * z * (k / (c + k - 1.0))
        total += term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            break
    return total / math.gamma(c)


def phi_boundary(lam, e_n, nstates):
    """Antiderivative kernel of the squeezed-window reduction.

    phi(lam; e) = lam^F (2 - lam e)^(1-F) [2(F-2)(F-1) 2F~1(1,1;F+1;lam e/2)
                                           + (6 - 2F - lam e)/Gamma(F)].
    For F = 2 this is exactly lam^2.
    """
    lam = np.asarray(lam, float)
    e_n = np.asarray(e_n, float)
    F = nstates
    bracket = (6.0 - 2.0 * F - lam * e_n) / math.gamma(F)
    if F > 2:
        bracket = bracket + 2.0 * (F - 2) * (F - 1) * hyp_series(F, lam * e_n / 2.0)
    return lam**F * (2.0 - lam * e_n) ** (1 - F) * bracket


def sqz_weight(e0, et, n, m, gamma):
    """Squeezed-window weight pairing dominance at time 0 (state n) with
    dominance at time t (state m); zero unless both dominate."""
    e0 = np.atleast_2d(np.asarray(e0, float))
    et = np.atleast_2d(np.asarray(et, float))
    F = e0.shape[-1]
    _check_gamma(F, gamma)

    others0 = np.delete(e0, n, axis=1)
    otherst = np.delete(et, m, axis=1)
    dominant = np.all(e0[:, n][:, None] >= others0, axis=1)
    dominant &= np.all(et[:, m][:, None] >= otherst, axis=1)

    out = np.zeros(e0.shape[0])
    if dominant.any():
        sel = np.flatnonzero(dominant)
        e0n = e0[sel, n]
        lam_hi = np.minimum(
            np.min(2.0 / (others0[sel] + e0n[:, None]), axis=1),
            np.min(1.0 / otherst[sel], axis=1),
        )
        lam_lo = np.maximum(1.0 / e0n, 1.0 / et[sel, m])
        z = phi_boundary(lam_hi, e0n, F) - phi_boundary(lam_lo, e0n, F)
        out[sel] = ((1.0 + F * gamma) ** F / F) * np.maximum(z, 0.0)
    return out if out.shape[0] > 1 else float(out[0])


def sqz_kernel(e, n):
    """Dominance indicator of the squeezed-window formulation."""
    e = np.atleast_2d(np.asarray(e, float))
    others = np.delete(e, n, axis=1)
    ok = np.all(e[:, n][:, None] >= others, axis=1)
    return ok if ok.shape[0] > 1 else bool(ok[0])
