"""Independent references: matrix-exponential electronic dynamics and
Monte-Carlo verification of the window-integral and squeezed-window identities.
"""

from dataclasses import dataclass

import numpy as np

from .mapping import (
    actions,
    sample_cps_many,
    sample_tw_many,
    sqz_weight,
    window_bin_assign,
)


def propagator(H, t):
    """U(t) = exp(-i H t) for Hermitian H, by eigendecomposition."""
    H = np.asarray(H)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w * t)) @ np.conj(V.T)


def electronic_exact(H, t, n, m, k, l):
    """Exact frozen-nuclei correlation Tr[|n><m| e^{iHt} |k><l| e^{-iHt}]
    = U_ln(t) conj(U_km(t))."""
    U = propagator(H, t)
    return U[l, n] * np.conj(U[k, m])


def batch_stderr(values, n_batches=32):
    """Batch-means standard error of the mean of a sample array."""
    values = np.asarray(values)
    n = len(values) // n_batches
    if n < 1:
        return float(np.std(values) / np.sqrt(max(len(values), 1)))
    means = values[: n * n_batches].reshape(n_batches, n).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


@dataclass
class IdentityCheck:
    name: str
    estimate: complex
    stderr: float
    target: complex
    n_sigma: float = 5.0
    atol: float = 0.0

    @property
    def error(self):
        return abs(self.estimate - self.target)

    @property
    def passed(self):
        return self.error <= max(self.n_sigma * self.stderr, self.atol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        est, tgt = complex(self.estimate), complex(self.target)
        if abs(est.imag) < 1e-12 and abs(tgt.imag) < 1e-12:
            body = f"{est.real:+.6f} vs {tgt.real:+.6f}"
        else:
            body = f"{est:.6f} vs {tgt:.6f}"
        return f"[{status}] {self.name}: {body} (err {self.error:.2e}, mc {self.stderr:.2e})"


def mc_verify_window_integrals(nstates, samples, rng):
    """Monte-Carlo check of the triangle-window action moments.

    The window sampler's density is exactly the weighted integrand, so the
    three integrals reduce to plain sample means:
        <e_occ> = 4/3, <e_other> = 1/3, <e_occ * e_other> = 5/12.
    """
    if samples < 10**5:
        raise ValueError("use at least 1e5 samples")
    g = sample_tw_many(nstates, 0, rng, samples)
    e = actions(g)
    e_occ = e[:, 0]
    e_other = e[:, 1]
    pair = e_occ * e_other
    return [
        IdentityCheck("self action <e_occ>", float(e_occ.mean()),
                      batch_stderr(e_occ), 4.0 / 3.0),
        IdentityCheck("cross action <e_other>", float(e_other.mean()),
                      batch_stderr(e_other), 1.0 / 3.0),
        IdentityCheck("pair action <e_occ e_other>", float(pair.mean()),
                      batch_stderr(pair), 5.0 / 12.0),
    ]


def tw_population_estimate(g_t, k):
    """Window-bin ratio estimate of the population of state k, with its
    batch-means error; None when no trajectory falls in any bin."""
    e = actions(g_t)
    bins = window_bin_assign(e)
    den = bins >= 0
    if not den.any():
        return None, None
    num = bins == k
    est = num.sum() / den.sum()
    # batch-means on the ratio
    nb = 32
    n = len(bins) // nb
    if n >= 1:
        bn = bins[: n * nb].reshape(nb, n)
        with np.errstate(invalid="ignore"):
            ratios = (bn == k).sum(axis=1) / np.maximum((bn >= 0).sum(axis=1), 1)
        err = float(np.std(ratios, ddof=1) / np.sqrt(nb))
    else:
        err = float("nan")
    return float(est), err


def sqz_population_estimate(e0, e_t, n, k, gamma):
    """Squeezed-window ratio estimate of the n -> k population transfer."""
    F = e0.shape[1]
    weights = np.stack([sqz_weight(e0, e_t, n, m, gamma) for m in range(F)], axis=1)
    den = weights.sum(axis=1)
    tot = den.sum()
    if tot <= 0:
        return None, None
    est = weights[:, k].sum() / tot
    nb = 32
    nbatch = len(den) // nb
    wnum = weights[:, k][: nbatch * nb].reshape(nb, nbatch)
    wden = den[: nbatch * nb].reshape(nb, nbatch)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = wnum.sum(axis=1) / wden.sum(axis=1)
    ratios = ratios[np.isfinite(ratios)]
    err = float(np.std(ratios, ddof=1) / np.sqrt(len(ratios))) if len(ratios) > 1 else float("nan")
    return float(est), err


def complex_stderr(values, n_batches=32):
    return float(np.hypot(batch_stderr(np.real(values), n_batches),
                          batch_stderr(np.imag(values), n_batches)))


def mc_verify_frozen_identities(F, samples, rng, gamma=0.5, n_times=4,
                                hamiltonian=None, n_sigma=3.0):
    """Check every estimator kind against the exact frozen-nuclei propagator.

    Covers the window-ratio population estimator (exact for F = 2), the
    population-coherence and coherence-coherence kernel averages (exact for
    all F), and the CPS kernel-product estimator (exact for all F and gamma).
    """
    from .estimators import (
        COHERENCE_INITIAL_PREFACTOR,
        cmm_kernel,
        naf_kernel_initial,
        naf_kernel_t,
    )

    if hamiltonian is None:
        h = rng.standard_normal((F, F))
        hamiltonian = 0.5 * (h + h.T)
    H = np.asarray(hamiltonian)
    w = np.linalg.eigvalsh(H)
    period = 2.0 * np.pi / max(w[-1] - w[0], 1e-6)
    t_grid = np.linspace(0.2 * period, period, n_times)

    n, m = 0, 1 % F
    g_tw = sample_tw_many(F, n, rng, samples)
    # coherence-initial mixture: occupied state n or m with equal probability
    occ = np.where(rng.random(samples) < 0.5, n, m)
    g_coh = np.empty((samples, F), complex)
    for j in (n, m):
        sel = occ == j
        g_coh[sel] = sample_tw_many(F, j, rng, int(sel.sum()))
    k0_coh = COHERENCE_INITIAL_PREFACTOR * cmm_kernel(g_coh, m, n)
    g_cps = sample_cps_many(F, gamma, rng, samples)
    k0_cps = naf_kernel_initial(g_cps, n, m, gamma)
    k0_cps_pop = naf_kernel_initial(g_cps, n, n, gamma)

    checks = []
    for t in t_grid:
        U = propagator(H, t)
        gt_tw = g_tw @ U.T
        gt_coh = g_coh @ U.T
        gt_cps = g_cps @ U.T
        for k in range(F):
            # population-population via window bins (exact only for F = 2)
            if F == 2:
                est, err = tw_population_estimate(gt_tw, k)
                checks.append(IdentityCheck(
                    f"tw pop {n}->{k} t={t:.3f}", est, err,
                    abs(U[k, n]) ** 2, n_sigma=n_sigma, atol=5e-3))
        for (k, l) in ((0, 1 % F), (1 % F, 0)):
            if k == l:
                continue
            # population-coherence: <K_lk(t)> = U_ln U*_kn
            vals = cmm_kernel(gt_tw, l, k)
            checks.append(IdentityCheck(
                f"tw pop-coh ({n},{n})->({k},{l}) t={t:.3f}",
                complex(vals.mean()), complex_stderr(vals),
                U[l, n] * np.conj(U[k, n]), n_sigma=n_sigma))
            # coherence-coherence: (12/5)<K_mn(0) K_lk(t)> = U_ln U*_km
            vals = k0_coh * cmm_kernel(gt_coh, l, k)
            checks.append(IdentityCheck(
                f"tw coh-coh ({n},{m})->({k},{l}) t={t:.3f}",
                complex(vals.mean()), complex_stderr(vals),
                U[l, n] * np.conj(U[k, m]), n_sigma=n_sigma))
        # CPS kernel products, population and coherence flavors
        for (kk, ll), k0 in (((n, n), k0_cps_pop), ((0, 1 % F), k0_cps)):
            init_pair = (n, n) if k0 is k0_cps_pop else (n, m)
            vals = F * k0 * naf_kernel_t(gt_cps, kk, ll, gamma)
            checks.append(IdentityCheck(
                f"cps ({init_pair[0]},{init_pair[1]})->({kk},{ll}) t={t:.3f}",
                complex(vals.mean()), complex_stderr(vals),
                U[ll, init_pair[0]] * np.conj(U[kk, init_pair[1]]), n_sigma=n_sigma))
    return checks


def mc_verify_sqz_equivalence(gamma, H, t_grid, samples, rng, n_init=0):
    """Compare squeezed-window and triangle-window population estimates for a
    frozen two-state Hamiltonian, and both against the exact propagator.

    Returns a list of dicts, one per (t, k).
    """
    H = np.asarray(H)
    F = H.shape[0]
    if F != 2:
        raise ValueError("squeezed-window comparison is implemented for F = 2")
    g_tw = sample_tw_many(F, n_init, rng, samples)
    g_cps = sample_cps_many(F, gamma, rng, samples)
    e0 = actions(g_cps)
    out = []
    for t in np.asarray(t_grid, float):
        U = propagator(H, t)
        gt_tw = g_tw @ U.T
        gt_cps = g_cps @ U.T
        et_cps = actions(gt_cps)
        for k in range(F):
            tw_est, tw_err = tw_population_estimate(gt_tw, k)
            sq_est, sq_err = sqz_population_estimate(e0, et_cps, n_init, k, gamma)
            exact = abs(U[k, n_init]) ** 2
            out.append({
                "t": float(t), "state": k, "exact": float(exact),
                "tw": tw_est, "tw_err": tw_err,
                "sqz": sq_est, "sqz_err": sq_err,
            })
    return out
