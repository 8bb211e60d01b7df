"""Turns trajectory ensembles into observables: electronic correlation
functions, populations and coherences, nuclear means and momentum
distributions, scattering probabilities, and the flux-flux rate.

Every estimate is a ratio of block-summed numerators and denominators;
window-ratio estimators carry the bin count in the denominator, kernel
averages carry the live-trajectory count.  Statistical errors are
batch-means over the reduction blocks, and block partials are always merged
in block order so bitwise-reproducible runs stay byte-identical for any
worker count.
"""

import json
from dataclasses import dataclass

import numpy as np

from .mapping import actions, window_bin_assign

# ---------------------------------------------------------------------------
# series container and CSV schema

CSV_MAGIC = "# nafdyn-series v1"


@dataclass
class EstimateSeries:
    times: np.ndarray
    values: np.ndarray  # complex; NaN marks undefined points
    stderr: np.ndarray
    n_traj: np.ndarray
    descriptor: dict

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(CSV_MAGIC + "\n")
            fh.write("# descriptor: " + json.dumps(self.descriptor, sort_keys=True) + "\n")
            fh.write("time,re,im,stderr,n_traj\n")
            for t, v, s, n in zip(self.times, self.values, self.stderr, self.n_traj):
                v = complex(v)
                if np.isnan(v.real):
                    fh.write(f"{float(t)!r},,,,{int(n)}\n")
                else:
                    fh.write(f"{float(t)!r},{v.real!r},{v.imag!r},{float(s)!r},{int(n)}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            magic = fh.readline().strip()
            if magic != CSV_MAGIC:
                raise ValueError(f"{path}: not a nafdyn series file")
            desc_line = fh.readline().strip()
            if not desc_line.startswith("# descriptor: "):
                raise ValueError(f"{path}: missing descriptor header")
            descriptor = json.loads(desc_line[len("# descriptor: "):])
            header = fh.readline().strip()
            if header != "time,re,im,stderr,n_traj":
                raise ValueError(f"{path}: unexpected column header")
            times, values, stderr, ntraj = [], [], [], []
            for line in fh:
                cells = line.rstrip("\n").split(",")
                times.append(float(cells[0]))
                if cells[1] == "":
                    values.append(complex(np.nan, np.nan))
                    stderr.append(np.nan)
                else:
                    values.append(complex(float(cells[1]), float(cells[2])))
                    stderr.append(float(cells[3]))
                ntraj.append(int(cells[4]))
        return cls(np.array(times), np.array(values), np.array(stderr),
                   np.array(ntraj), descriptor)


# ---------------------------------------------------------------------------
# nuclear observables


@dataclass(frozen=True)
class NuclearObservable:
    """A_W(R, P): identity, a coordinate-region indicator, or a phase-space
    coordinate itself (for means)."""

    kind: str = "identity"  # identity | region | coordinate | momentum
    mode: int = 0
    sign: int = 1  # region: +1 keeps R_mode > threshold, -1 the other side
    threshold: float = 0.0

    def evaluate(self, R, P):
        if self.kind == "identity":
            return np.ones(R.shape[0])
        if self.kind == "region":
            if self.sign >= 0:
                return (R[:, self.mode] > self.threshold).astype(float)
            return (R[:, self.mode] < self.threshold).astype(float)
        if self.kind == "coordinate":
            return R[:, self.mode]
        if self.kind == "momentum":
            return P[:, self.mode]
        raise ValueError(f"unknown nuclear observable {self.kind!r}")

    @property
    def label(self):
        if self.kind == "identity":
            return "1"
        if self.kind == "region":
            cmp = ">" if self.sign >= 0 else "<"
            return f"R[{self.mode}]{cmp}{self.threshold:g}"
        return f"{self.kind}[{self.mode}]"


IDENTITY = NuclearObservable()


# ---------------------------------------------------------------------------
# per-snapshot views


class SnapshotView:
    """Lazy per-snapshot quantities in either electronic basis."""

    def __init__(self, state, model):
        self.state = state
        self.model = model
        self.alive = ~state.failed
        self._cache = {}

    def g(self, basis):
        if basis == "adiabatic":
            return self.state.g
        if "g_dia" not in self._cache:
            self._cache["g_dia"] = np.einsum("bnk,bk->bn", self.state.trans, self.state.g)
        return self._cache["g_dia"]

    def e(self, basis):
        key = "e_" + basis
        if key not in self._cache:
            self._cache[key] = actions(self.g(basis))
        return self._cache[key]

    def bins(self, basis):
        key = "bins_" + basis
        if key not in self._cache:
            self._cache[key] = window_bin_assign(self.e(basis))
        return self._cache[key]

    def rho_gg(self, basis):
        key = "rho_" + basis
        if key not in self._cache:
            g = self.g(basis)
            self._cache[key] = 0.5 * (g[:, :, None] * np.conj(g[:, None, :]))
        return self._cache[key]

    def active_weights(self, basis):
        """Surface-hopping active-state weights, rotated for diabatic requests."""
        key = "act_" + basis
        if key not in self._cache:
            B, F = self.state.g.shape
            if basis == "adiabatic":
                w = np.zeros((B, F))
                w[np.arange(B), self.state.j_occ] = 1.0
            else:
                cols = np.take_along_axis(self.state.trans,
                                          self.state.j_occ[:, None, None], axis=2)[:, :, 0]
                w = cols**2
            self._cache[key] = w
        return self._cache[key]


# ---------------------------------------------------------------------------
# kernels


def naf_kernel_initial(g_raw, n, m, gamma):
    """[ (x_m + i p_m)(x_n - i p_n)/2 - gamma delta_mn ] per trajectory."""
    k = 0.5 * g_raw[:, m] * np.conj(g_raw[:, n])
    if n == m:
        k = k - gamma
    return k


def naf_kernel_t(g, k, l, gamma):
    """[(1+F)/(2(1+F g)^2)(x_l + i p_l)(x_k - i p_k) - (1-g)/(1+F g) delta_lk]."""
    F = g.shape[1]
    s = 1.0 + F * gamma
    out = (1.0 + F) / s**2 * 0.5 * g[:, l] * np.conj(g[:, k])
    if k == l:
        out = out - (1.0 - gamma) / s
    return out


def cmm_kernel(g, l, k):
    return 0.5 * g[:, l] * np.conj(g[:, k])


COHERENCE_INITIAL_PREFACTOR = 12.0 / 5.0


# ---------------------------------------------------------------------------
# streaming accumulators
#
# Channels are (target, observable) pairs; every accumulator reduces to block
# sums num[s, c], den[s, c], live[s], and the estimate is num/den per channel.


class Accumulator:
    complex_valued = True

    def __init__(self, n_times, n_channels):
        self.num = np.zeros((n_times, n_channels),
                            dtype=complex if self.complex_valued else float)
        self.den = np.zeros((n_times, n_channels))
        self.live = np.zeros(n_times, dtype=np.int64)

    def start(self, state0, init_record, model):
        pass

    def add(self, s_idx, view):
        raise NotImplementedError

    def partials(self):
        return {"num": self.num, "den": self.den, "live": self.live}


class TWPopulationAccumulator(Accumulator):
    """Window-bin ratio estimator: channels are (state, observable)."""

    def __init__(self, n_times, channels, basis):
        self.channels = channels
        self.basis = basis
        super().__init__(n_times, len(channels))

    def add(self, s_idx, view):
        alive = view.alive
        bins = view.bins(self.basis)
        inbin = (bins >= 0) & alive
        n_inbin = inbin.sum()
        for c, (k, obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            sel = inbin & (bins == k)
            self.num[s_idx, c] += complex(a[sel].sum())
            self.den[s_idx, c] += n_inbin
        self.live[s_idx] += alive.sum()


class TWKernelAccumulator(Accumulator):
    """Kernel averages for window-sampled ensembles.

    channels are ((k, l), observable); with initial_pair=(n, m) the time-0
    coherence kernel and its 12/5 prefactor multiply every contribution.
    """

    def __init__(self, n_times, channels, basis, initial_pair=None):
        self.channels = channels
        self.basis = basis
        self.initial_pair = initial_pair
        self.k0 = None
        super().__init__(n_times, len(channels))

    def start(self, state0, init_record, model):
        if self.initial_pair is not None:
            n, m = self.initial_pair
            self.k0 = COHERENCE_INITIAL_PREFACTOR * cmm_kernel(init_record["g_raw"], m, n)

    def add(self, s_idx, view):
        alive = view.alive
        g = view.g(self.basis)
        n_alive = alive.sum()
        for c, ((k, l), obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            val = cmm_kernel(g, l, k) * (a if self.k0 is None else a * self.k0)
            self.num[s_idx, c] += val[alive].sum()
            self.den[s_idx, c] += n_alive
        self.live[s_idx] += n_alive


class NaFAccumulator(Accumulator):
    """CPS kernel products (initial x time-t x A_W) including the measure
    factor F; channels are ((n, m, k, l), observable)."""

    def __init__(self, n_times, channels, basis, gamma):
        self.channels = channels
        self.basis = basis
        self.gamma = gamma
        self.k0 = {}
        super().__init__(n_times, len(channels))

    def start(self, state0, init_record, model):
        g0 = init_record["g_raw"]
        for (n, m, _k, _l), _obs in self.channels:
            if (n, m) not in self.k0:
                self.k0[(n, m)] = naf_kernel_initial(g0, n, m, self.gamma)

    def add(self, s_idx, view):
        alive = view.alive
        g = view.g(self.basis)
        F = g.shape[1]
        n_alive = alive.sum()
        for c, ((n, m, k, l), obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            val = F * self.k0[(n, m)] * naf_kernel_t(g, k, l, self.gamma) * a
            self.num[s_idx, c] += val[alive].sum()
            self.den[s_idx, c] += n_alive
        self.live[s_idx] += n_alive


class DensityAccumulator(Accumulator):
    """Amplitude-density averages (ehrenfest) and the surface-hopping mixed
    estimator (populations from the active state, coherences from the
    amplitudes); channels are ((n, m), observable)."""

    def __init__(self, n_times, channels, basis, fssh=False):
        self.channels = channels
        self.basis = basis
        self.fssh = fssh
        super().__init__(n_times, len(channels))

    def add(self, s_idx, view):
        alive = view.alive
        n_alive = alive.sum()
        rho = view.rho_gg(self.basis)
        act = view.active_weights(self.basis) if self.fssh else None
        for c, ((n, m), obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            if self.fssh and n == m:
                val = act[:, n] * a
            else:
                val = rho[:, n, m] * a
            self.num[s_idx, c] += val[alive].sum()
            self.den[s_idx, c] += n_alive
        self.live[s_idx] += n_alive


class WindowedMeanAccumulator(Accumulator):
    """Identity-electronic nuclear mean over window-sampled ensembles: the
    resolved identity is the bin indicator sum, so the mean is bin-weighted."""

    complex_valued = False

    def __init__(self, n_times, channels, basis):
        self.channels = channels  # (None, observable)
        self.basis = basis
        super().__init__(n_times, len(channels))

    def add(self, s_idx, view):
        alive = view.alive
        inbin = (view.bins(self.basis) >= 0) & alive
        n_inbin = inbin.sum()
        for c, (_t, obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            self.num[s_idx, c] += a[inbin].sum()
            self.den[s_idx, c] += n_inbin
        self.live[s_idx] += alive.sum()


class MeanAccumulator(Accumulator):
    """Plain ensemble mean of nuclear observables; for CPS ensembles the
    resolved electronic identity leaves F x initial population kernel as a
    weight (the time-t kernels sum to one on the sphere)."""

    complex_valued = False

    def __init__(self, n_times, channels, naf_gamma=None):
        self.channels = channels
        self.naf_gamma = naf_gamma
        self.k0 = None
        super().__init__(n_times, len(channels))

    def start(self, state0, init_record, model):
        if self.naf_gamma is not None:
            g0 = init_record["g_raw"]
            occ = init_record["j_occ0"]
            e_occ = 0.5 * np.abs(g0[np.arange(len(occ)), occ]) ** 2
            self.k0 = (e_occ - self.naf_gamma) * g0.shape[1]

    def add(self, s_idx, view):
        alive = view.alive
        n_alive = alive.sum()
        for c, (_t, obs) in enumerate(self.channels):
            a = obs.evaluate(view.state.R, view.state.P)
            if self.k0 is not None:
                a = a * self.k0
            self.num[s_idx, c] += a[alive].sum()
            self.den[s_idx, c] += n_alive
        self.live[s_idx] += alive.sum()


class HistogramAccumulator(Accumulator):
    """Momentum histogram of one nuclear mode; channels are the bins."""

    complex_valued = False

    def __init__(self, n_times, bin_edges, mode=0, weighting="raw", basis="adiabatic"):
        self.bin_edges = np.asarray(bin_edges, float)
        self.mode = mode
        self.weighting = weighting  # raw | window
        self.basis = basis
        super().__init__(n_times, len(self.bin_edges) - 1)

    def add(self, s_idx, view):
        alive = view.alive
        p = view.state.P[:, self.mode]
        if self.weighting == "window":
            w = ((view.bins(self.basis) >= 0) & alive).astype(float)
        else:
            w = alive.astype(float)
        hist, _ = np.histogram(p, bins=self.bin_edges, weights=w)
        self.num[s_idx, :] += hist
        self.den[s_idx, :] += w.sum()
        self.live[s_idx] += alive.sum()


# ---------------------------------------------------------------------------
# merging block partials


def merge_partials(parts_list, times, descriptor_base, channel_descriptors):
    """Combine ordered per-block partials into one EstimateSeries per channel.

    stderr is the batch-means spread of per-block ratios; the estimate itself
    is the global-sum ratio.
    """
    num = np.zeros_like(parts_list[0]["num"])
    den = np.zeros_like(parts_list[0]["den"])
    live = np.zeros_like(parts_list[0]["live"])
    for p in parts_list:  # fixed block order keeps bitwise mode byte-identical
        num = num + p["num"]
        den = den + p["den"]
        live = live + p["live"]

    n_times, n_chan = num.shape
    series = []
    for c in range(n_chan):
        good = den[:, c] > 0
        safe = np.where(good, den[:, c], 1.0)
        vals = np.where(good, num[:, c] / safe, np.nan * (1 + 1j))
        ratios = []
        for p in parts_list:
            d = p["den"][:, c]
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios.append(np.where(d > 0, p["num"][:, c] / np.where(d > 0, d, 1.0), np.nan))
        br = np.asarray(ratios)
        nb = np.sum(np.isfinite(br.real), axis=0)
        if len(parts_list) > 1:
            with np.errstate(invalid="ignore"):
                spread = np.hypot(np.nanstd(br.real, axis=0, ddof=1),
                                  np.nanstd(br.imag, axis=0, ddof=1))
            stderr = np.where(nb > 1, spread / np.sqrt(np.maximum(nb, 1)), 0.0)
        else:
            stderr = np.zeros(n_times)
        desc = dict(descriptor_base)
        desc.update(channel_descriptors[c])
        series.append(EstimateSeries(np.asarray(times, float), vals, stderr,
                                     live.copy(), desc))
    return series


def normalize_histogram_series(series_list, bin_edges):
    """Convert per-bin count fractions into a unit-integral density."""
    widths = np.diff(np.asarray(bin_edges, float))
    n_times = len(series_list[0].times)
    for s_idx in range(n_times):
        dens = np.array([s.values[s_idx].real for s in series_list]) / widths
        total = np.sum(dens * widths)
        for c, s in enumerate(series_list):
            if total > 0 and np.isfinite(total):
                s.values[s_idx] = dens[c] / total
                s.stderr[s_idx] = s.stderr[s_idx] / widths[c] / total
            else:
                s.values[s_idx] = np.nan
                s.stderr[s_idx] = np.nan
    return series_list


# ---------------------------------------------------------------------------
# rates


def marcus_rate(eps, lambda_reorg, delta, beta):
    """High-temperature golden-rule electron-transfer rate,
    k = Delta^2 sqrt(pi beta/lambda) exp(-beta (eps - lambda)^2/(4 lambda))."""
    if lambda_reorg <= 0:
        raise ValueError("reorganization energy must be positive")
    return delta**2 * np.sqrt(np.pi * beta / lambda_reorg) * np.exp(
        -beta * (eps - lambda_reorg) ** 2 / (4.0 * lambda_reorg))


def flux_correlation_from_correlators(c1212, c1221, c2112, c2121, delta):
    """C_FF(t) = -Delta^2 [C_{12,12} - C_{12,21} - C_{21,12} + C_{21,21}]."""
    return -delta**2 * (c1212 - c1221 - c2112 + c2121)


def integrate_rate(times, cff, plateau_frac=0.1, plateau_tol=0.01):
    """Trapezoid integral of Re C_FF cut at the first detected plateau.

    A plateau is a trailing window (plateau_frac of the scan) over which the
    running integral varies by less than plateau_tol relative to its value;
    without one the full-window integral is returned flagged unconverged.
    """
    times = np.asarray(times, float)
    vals = np.real(np.asarray(cff))
    running = np.concatenate([[0.0], np.cumsum(np.diff(times) * 0.5 * (vals[1:] + vals[:-1]))])
    tail = max(3, int(np.ceil(plateau_frac * len(times))))
    for i in range(tail, len(running) + 1):
        window = running[i - tail:i]
        scale = abs(running[i - 1])
        if scale > 1e-300 and (window.max() - window.min()) < plateau_tol * scale:
            return float(running[i - 1]), True, running
    return float(running[-1]), False, running


# ---------------------------------------------------------------------------
# ensemble-history estimators (single-process convenience surface; the runner
# streams the same accumulators over blocks)


def _replay(history, factory, n_chunks=16):
    B = history.snapshots[0].size
    bounds = np.linspace(0, B, min(n_chunks, B) + 1).astype(int)
    parts = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue
        subs, rec = history.subset(a, b)
        acc = factory(len(history.times))
        acc.start(subs[0], rec, history.model)
        for s_idx, st in enumerate(subs):
            acc.add(s_idx, SnapshotView(st, history.model))
        parts.append(acc.partials())
    return parts


def _series(history, factory, descriptor, n_chunks=16):
    parts = _replay(history, factory, n_chunks)
    base = {"model": history.model.name, "method": history.variant.name}
    return merge_partials(parts, history.times, base, [descriptor])[0]


def estimate_naf(history, n, m, k, l, observable=None, basis="diabatic", gamma=None):
    """CPS-ensemble estimate of Tr[(|n><m| x rho) e^{iHt} (|k><l| x A) e^{-iHt}]."""
    gamma = history.variant.gamma if gamma is None else gamma
    obs = observable or IDENTITY
    desc = {"kind": "correlation", "n": n + 1, "m": m + 1, "k": k + 1, "l": l + 1,
            "basis": basis, "observable": obs.label}
    return _series(history, lambda S: NaFAccumulator(
        S, [((n, m, k, l), obs)], basis, gamma), desc)


def estimate_tw_population(history, k, observable=None, basis="diabatic"):
    """Window-bin ratio estimate of the population of state k (times A)."""
    obs = observable or IDENTITY
    desc = {"kind": "population", "state": k + 1, "basis": basis,
            "observable": obs.label}
    return _series(history, lambda S: TWPopulationAccumulator(
        S, [(k, obs)], basis), desc)


def estimate_tw_pop_coherence(history, k, l, observable=None, basis="diabatic"):
    """Population-initial coherence estimate: mean of the mapping kernel for
    the time-t operator |k><l| (times A)."""
    obs = observable or IDENTITY
    desc = {"kind": "correlation", "k": k + 1, "l": l + 1, "basis": basis,
            "observable": obs.label}
    return _series(history, lambda S: TWKernelAccumulator(
        S, [((k, l), obs)], basis), desc)


def estimate_tw_coherence_initial(history, n, m, k, l, observable=None,
                                  basis="diabatic"):
    """Coherence-initial estimate: (12/5) <K_mn(0) K_lk(t) A>; the history
    must have been sampled with the (n, m) coherence initial condition."""
    obs = observable or IDENTITY
    desc = {"kind": "correlation", "n": n + 1, "m": m + 1, "k": k + 1,
            "l": l + 1, "basis": basis, "observable": obs.label}
    return _series(history, lambda S: TWKernelAccumulator(
        S, [((k, l), obs)], basis, initial_pair=(n, m)), desc)


def population_difference(history, basis="diabatic"):
    """D(t) = P_1(t) - P_2(t) for two-state models."""
    if history.model.nstates != 2:
        raise ValueError("population difference requires a two-state model")
    p1 = estimate_population(history, 0, basis=basis)
    p2 = estimate_population(history, 1, basis=basis)
    vals = p1.values.real - p2.values.real
    err = np.hypot(p1.stderr, p2.stderr)
    desc = {**p1.descriptor, "kind": "population_difference", "state": None}
    return EstimateSeries(p1.times, vals.astype(complex), err, p1.n_traj, desc)


def estimate_population(history, k, observable=None, basis="diabatic"):
    """Population of state k with the estimator matching the ensemble's method."""
    fam = history.variant.estimator
    obs = observable or IDENTITY
    if fam == "tw":
        return estimate_tw_population(history, k, obs, basis)
    if fam == "cps":
        n0 = history.init_record["electronic"].indices[0]
        return estimate_naf(history, n0, n0, k, k, obs, basis)
    desc = {"kind": "population", "state": k + 1, "basis": basis,
            "observable": obs.label}
    return _series(history, lambda S: DensityAccumulator(
        S, [((k, k), obs)], basis, fssh=(fam == "fssh")), desc)


def momentum_histogram(history, bins, weighting="raw", mode=0, basis="adiabatic"):
    """Unit-normalized momentum density over the given bin edges; one series
    per snapshot time, values indexed by bin center."""
    edges = np.asarray(bins, float)
    centers = 0.5 * (edges[1:] + edges[:-1])
    if history.model.nmodes != 1 and mode >= history.model.nmodes:
        raise ValueError("momentum histogram mode out of range")
    parts = _replay(history, lambda S: HistogramAccumulator(
        S, edges, mode=mode, weighting=weighting, basis=basis))
    base = {"model": history.model.name, "method": history.variant.name}
    per_bin = merge_partials(parts, history.times, base,
                             [{"bin": float(c)} for c in centers])
    normalize_histogram_series(per_bin, edges)
    out = []
    for s_idx, t in enumerate(history.times):
        vals = np.array([s.values[s_idx] for s in per_bin])
        errs = np.array([s.stderr[s_idx] for s in per_bin])
        ntr = np.array([s.n_traj[s_idx] for s in per_bin])
        desc = {**base, "kind": "momentum_histogram", "at_time": float(t),
                "abscissa": "momentum", "weighting": weighting}
        out.append(EstimateSeries(centers.copy(), vals, errs, ntr, desc))
    return out


def scattering_probabilities(history, threshold=0.0):
    """Final-time (channel, adiabatic state) probabilities for 1-d models.

    Returns {(channel, state): EstimateSeries-like single-row series}.
    """
    if history.model.nmodes != 1:
        raise ValueError("scattering requires a 1-d model")
    F = history.model.nstates
    out = {}
    for label, sign in (("transmit", 1), ("reflect", -1)):
        for k in range(F):
            obs = NuclearObservable("region", 0, sign, threshold)
            fam = history.variant.estimator
            if fam == "tw":
                s = estimate_tw_population(history, k, obs, "adiabatic")
            elif fam == "cps":
                n0 = history.init_record["electronic"].indices[0]
                s = estimate_naf(history, n0, n0, k, k, obs, "adiabatic")
            else:
                desc = {"kind": "scattering", "channel": label, "state": k + 1}
                s = _series(history, lambda S, kk=k, oo=obs: DensityAccumulator(
                    S, [((kk, kk), oo)], "adiabatic", fssh=(fam == "fssh")), desc)
            s.descriptor.update({"kind": "scattering", "channel": label, "state": k + 1})
            out[(label, k)] = s
    return out


def flux_flux_rate(history, delta, plateau_frac=0.1, plateau_tol=0.01):
    """Flux-flux correlation function and its time integral (the rate) from a
    coherence-initialized two-state ensemble.

    The flux operator i Delta (|1><2| - |2><1|) expands C_FF over the four
    coherence-coherence correlators.  Returns (series, rate, converged).
    """
    if history.model.nstates != 2:
        raise ValueError("flux-flux rate requires a two-state model")
    fam = history.variant.estimator
    corr = {}
    for nmkl in ((0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0)):
        n, m, k, l = nmkl
        if fam == "tw":
            corr[nmkl] = estimate_tw_coherence_initial(history, n, m, k, l)
        elif fam == "cps":
            corr[nmkl] = estimate_naf(history, n, m, k, l)
        else:
            raise ValueError("flux-flux rate needs a tw or cps ensemble")
    cff = flux_correlation_from_correlators(
        corr[(0, 1, 0, 1)].values, corr[(0, 1, 1, 0)].values,
        corr[(1, 0, 0, 1)].values, corr[(1, 0, 1, 0)].values, delta)
    err = delta**2 * np.sqrt(sum(s.stderr**2 for s in corr.values()))
    rate, converged, _running = integrate_rate(history.times, cff,
                                               plateau_frac, plateau_tol)
    series = EstimateSeries(
        history.times, cff, err, corr[(0, 1, 0, 1)].n_traj,
        {"model": history.model.name, "method": history.variant.name,
         "kind": "flux_flux", "converged": converged})
    return series, rate, converged
