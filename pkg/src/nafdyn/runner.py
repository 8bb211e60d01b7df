"""Run orchestration: validated run configurations, deterministic
per-trajectory random substreams, block-parallel ensemble execution,
estimator reduction, and CSV/manifest output.

Reproducibility contract: trajectory s always draws from the Philox stream
keyed (seed, s); the ensemble is split into fixed-size blocks reduced in
block order, so bitwise mode produces byte-identical output for any worker
count.
"""

import hashlib
import json
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import yaml

from .estimators import (
    DensityAccumulator,
    EstimateSeries,
    HistogramAccumulator,
    MeanAccumulator,
    NaFAccumulator,
    NuclearObservable,
    SnapshotView,
    TWKernelAccumulator,
    TWPopulationAccumulator,
    WindowedMeanAccumulator,
    flux_correlation_from_correlators,
    integrate_rate,
    merge_partials,
    normalize_histogram_series,
)
from .modelfile import build_model
from .models import ElectronicInit
from .propagation import MethodVariant, initialize_ensemble, propagate_ensemble

MANIFEST_SCHEMA_VERSION = 1
FAILURE_GATE = 1e-3  # run fails above this failed-trajectory fraction
WORKERS_ENV = "NAFDYN_WORKERS"

# ---------------------------------------------------------------------------
# configuration


_TOP_KEYS = {"model", "method", "ensemble", "dt", "t_max", "stride", "seed",
             "block_size", "workers", "reduction", "estimators", "out"}
_MODEL_KEYS = {"name", "params"}
_METHOD_KEYS = {"name", "gamma", "perpendicular_force"}
_ESTIMATOR_KEYS = {
    "population": {"kind", "basis"},
    "population_difference": {"kind", "basis"},
    "coherence": {"kind", "basis", "pair"},
    "correlation": {"kind", "basis", "n", "m", "k", "l", "observable"},
    "nuclear_mean": {"kind", "which", "mode"},
    "momentum_histogram": {"kind", "bins", "weighting", "mode", "at"},
    "scattering": {"kind", "threshold"},
}
_OBSERVABLE_KEYS = {"kind", "mode", "sign", "threshold"}


def _reject_unknown(d, allowed, where):
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass
class RunConfig:
    model_name: str
    model_params: dict
    method: dict
    ensemble: int
    dt: float
    t_max: float
    stride: int
    seed: int
    block_size: int
    workers: int
    reduction: str
    estimators: list
    out: str

    @classmethod
    def from_dict(cls, doc):
        _reject_unknown(doc, _TOP_KEYS, "run config")
        model = doc.get("model")
        if not isinstance(model, dict) or "name" not in model:
            raise ValueError("config needs model: {name, params}")
        _reject_unknown(model, _MODEL_KEYS, "model")
        method = dict(doc.get("method") or {})
        _reject_unknown(method, _METHOD_KEYS, "method")
        if "name" not in method:
            raise ValueError("config needs method.name")
        ests = doc.get("estimators") or []
        for i, e in enumerate(ests):
            kind = e.get("kind")
            if kind not in _ESTIMATOR_KEYS:
                raise ValueError(f"unknown estimator kind {kind!r}")
            _reject_unknown(e, _ESTIMATOR_KEYS[kind], f"estimator[{i}]")
            if "observable" in e and e["observable"] is not None:
                _reject_unknown(e["observable"], _OBSERVABLE_KEYS, f"estimator[{i}].observable")
        cfg = cls(
            model_name=model["name"],
            model_params=dict(model.get("params") or {}),
            method=method,
            ensemble=int(doc.get("ensemble", 1000)),
            dt=float(doc["dt"]) if "dt" in doc else None,
            t_max=float(doc["t_max"]),
            stride=int(doc.get("stride", 1)),
            seed=int(doc.get("seed", 0)),
            block_size=int(doc.get("block_size", 512)),
            workers=int(doc.get("workers", 0) or 0),
            reduction=doc.get("reduction", "bitwise"),
            estimators=ests,
            out=doc.get("out", "runs/out"),
        )
        if cfg.ensemble < 1:
            raise ValueError("ensemble must be >= 1")
        if cfg.reduction not in ("bitwise", "free-order"):
            raise ValueError("reduction must be bitwise or free-order")
        if cfg.t_max <= 0:
            raise ValueError("t_max must be positive")
        return cfg

    @classmethod
    def from_yaml(cls, path):
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self):
        return {
            "model": {"name": self.model_name, "params": self.model_params},
            "method": self.method,
            "ensemble": self.ensemble, "dt": self.dt, "t_max": self.t_max,
            "stride": self.stride, "seed": self.seed,
            "block_size": self.block_size, "workers": self.workers,
            "reduction": self.reduction, "estimators": self.estimators,
            "out": self.out,
        }

    def config_hash(self):
        semantic = self.to_dict()
        semantic.pop("out")
        semantic.pop("workers")  # execution layout never changes results
        blob = json.dumps(semantic, sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_dt(model):
    """Conservative per-model time steps: 0.1 for one-mode scattering and
    Morse models, max-frequency-limited for harmonic-mode models."""
    if model.kind in ("tully", "morse", "harmonic1d", "free1d"):
        return 0.1
    omegas = None
    if hasattr(model, "bath"):
        omegas = model.bath.omegas
    if hasattr(model, "mode_omegas"):
        omegas = model.mode_omegas
    if hasattr(model, "omegas"):
        omegas = model.omegas
    if omegas is not None:
        return 0.05 / float(np.max(omegas))
    return 0.1


def make_variant(method_cfg):
    cfg = dict(method_cfg)
    return MethodVariant(
        name=cfg["name"],
        gamma=float(cfg.get("gamma", 0.5)),
        perpendicular_force=bool(cfg.get("perpendicular_force", False)),
    )


def trajectory_rng(seed, index):
    """Counter-based substream for one trajectory: Philox keyed (seed, index)."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


# ---------------------------------------------------------------------------
# estimator request resolution


def _observable_from(req_obs):
    if not req_obs:
        return NuclearObservable()
    return NuclearObservable(
        kind=req_obs.get("kind", "identity"),
        mode=int(req_obs.get("mode", 1)) - 1 if "mode" in req_obs else 0,
        sign=int(req_obs.get("sign", 1)),
        threshold=float(req_obs.get("threshold", 0.0)),
    )


class ResolvedRequest:
    """An estimator request bound to a method family: an accumulator factory,
    per-channel descriptors/filenames, and any derived post-processing."""

    def __init__(self, factory, channel_descriptors, filenames,
                 post=None, init_pair=None):
        self.factory = factory
        self.channel_descriptors = channel_descriptors
        self.filenames = filenames
        self.post = post
        self.init_pair = init_pair  # unordered coherence pair required at t=0

    def finalize(self, parts_list, times, base_desc):
        series = merge_partials(parts_list, times, base_desc, self.channel_descriptors)
        if self.post is not None:
            return self.post(series)
        return list(zip(self.filenames, series))


def _default_basis(model, req):
    return req.get("basis") or model.init.electronic.basis


def resolve_request(req, model, variant):
    kind = req["kind"]
    F = model.nstates
    family = variant.estimator
    occ0 = model.init.electronic.indices[0]

    if kind in ("population", "population_difference"):
        basis = _default_basis(model, req)
        desc = [{"kind": "population", "state": k + 1, "basis": basis} for k in range(F)]
        names = [f"pop_{basis[:3]}_{k + 1}.csv" for k in range(F)]
        ident = NuclearObservable()
        if family == "tw":
            factory = lambda S: TWPopulationAccumulator(S, [(k, ident) for k in range(F)], basis)
        elif family == "cps":
            factory = lambda S: NaFAccumulator(
                S, [((occ0, occ0, k, k), ident) for k in range(F)], basis, variant.gamma)
        else:
            factory = lambda S: DensityAccumulator(
                S, [((k, k), ident) for k in range(F)], basis, fssh=(family == "fssh"))
        if kind == "population":
            return ResolvedRequest(factory, desc, names)

        if F != 2:
            raise ValueError("population_difference requires a two-state model")

        def diff_post(series):
            vals = series[0].values.real - series[1].values.real
            err = np.hypot(series[0].stderr, series[1].stderr)
            d = {"kind": "population_difference", "basis": basis}
            out = EstimateSeries(series[0].times, vals.astype(complex), err,
                                 series[0].n_traj, {**series[0].descriptor, **d,
                                                    "state": None})
            return [(f"popdiff_{basis[:3]}.csv", out)]

        return ResolvedRequest(factory, desc, names, post=diff_post)

    if kind == "coherence":
        basis = _default_basis(model, req)
        n, m = (int(x) - 1 for x in req["pair"])
        desc = [{"kind": "coherence", "pair": [n + 1, m + 1], "basis": basis}]
        names = [f"coh_{basis[:3]}_{n + 1}{m + 1}.csv"]
        ident = NuclearObservable()
        # rho_nm(t) is the correlator with the time-t operator |m><n|
        k, l = m, n
        if family == "tw":
            factory = lambda S: TWKernelAccumulator(S, [((k, l), ident)], basis)
        elif family == "cps":
            factory = lambda S: NaFAccumulator(
                S, [((occ0, occ0, k, l), ident)], basis, variant.gamma)
        else:
            factory = lambda S: DensityAccumulator(
                S, [((n, m), ident)], basis, fssh=(family == "fssh"))
        return ResolvedRequest(factory, desc, names)

    if kind == "correlation":
        basis = _default_basis(model, req)
        n, m = int(req["n"]) - 1, int(req["m"]) - 1
        k, l = int(req["k"]) - 1, int(req["l"]) - 1
        obs = _observable_from(req.get("observable"))
        desc = [{"kind": "correlation", "n": n + 1, "m": m + 1, "k": k + 1,
                 "l": l + 1, "basis": basis, "observable": obs.label}]
        names = [f"corr_{basis[:3]}_n{n + 1}m{m + 1}k{k + 1}l{l + 1}.csv"]
        init_pair = None
        if family == "cps":
            factory = lambda S: NaFAccumulator(S, [((n, m, k, l), obs)], basis, variant.gamma)
            if n != m:
                init_pair = frozenset((n, m))
        elif family == "tw":
            if n == m and k == l:
                factory = lambda S: TWPopulationAccumulator(S, [(k, obs)], basis)
            elif n == m:
                factory = lambda S: TWKernelAccumulator(S, [((k, l), obs)], basis)
            else:
                init_pair = frozenset((n, m))
                factory = lambda S: TWKernelAccumulator(
                    S, [((k, l), obs)], basis, initial_pair=(n, m))
        else:
            if n != m or k != l:
                raise ValueError(f"{variant.name} supports only population correlators")
            factory = lambda S: DensityAccumulator(
                S, [((k, k), obs)], basis, fssh=(family == "fssh"))
        return ResolvedRequest(factory, desc, names, init_pair=init_pair)

    if kind == "nuclear_mean":
        which = req.get("which", "coordinate")
        mode = int(req.get("mode", 1)) - 1
        obs = NuclearObservable(kind=which, mode=mode)
        desc = [{"kind": "nuclear_mean", "which": which, "mode": mode + 1}]
        names = [f"mean_{which}_{mode + 1}.csv"]
        if family == "tw":
            factory = lambda S: WindowedMeanAccumulator(S, [(None, obs)], "adiabatic")
        elif family == "cps":
            factory = lambda S: MeanAccumulator(S, [(None, obs)], naf_gamma=variant.gamma)
        else:
            factory = lambda S: MeanAccumulator(S, [(None, obs)])
        return ResolvedRequest(factory, desc, names)

    if kind == "momentum_histogram":
        bins = req.get("bins")
        if isinstance(bins, dict):
            edges = np.arange(bins["start"], bins["stop"] + 0.5 * bins["step"], bins["step"])
        else:
            edges = np.asarray(bins, float)
        weighting = req.get("weighting", "raw")
        mode = int(req.get("mode", 1)) - 1
        at_times = req.get("at")  # emit these times; default final
        centers = 0.5 * (edges[1:] + edges[:-1])
        desc = [{"kind": "momentum_histogram", "bin": float(c), "weighting": weighting,
                 "abscissa": "momentum"} for c in centers]
        factory = lambda S: HistogramAccumulator(S, edges, mode=mode, weighting=weighting)

        def hist_post(series):
            normalize_histogram_series(series, edges)
            times = series[0].times
            emit = at_times if at_times is not None else [times[-1]]
            out = []
            for t_req in emit:
                s_idx = int(np.argmin(np.abs(times - t_req)))
                vals = np.array([s.values[s_idx] for s in series])
                errs = np.array([s.stderr[s_idx] for s in series])
                ntr = np.array([s.n_traj[s_idx] for s in series])
                d = dict(series[0].descriptor)
                d.update({"kind": "momentum_histogram", "at_time": float(times[s_idx]),
                          "abscissa": "momentum", "bin": None, "weighting": weighting})
                es = EstimateSeries(centers.copy(), vals, errs, ntr, d)
                out.append((f"phist_t{times[s_idx]:g}.csv", es))
            return out

        return ResolvedRequest(factory, desc, None, post=hist_post)

    if kind == "scattering":
        if model.nmodes != 1:
            raise ValueError("scattering estimator requires a 1-d model")
        thr = float(req.get("threshold", 0.0))
        basis = "adiabatic"
        channels = []
        desc = []
        names = []
        for label, sign in (("transmit", 1), ("reflect", -1)):
            for k in range(F):
                channels.append((k, NuclearObservable("region", 0, sign, thr)))
                desc.append({"kind": "scattering", "channel": label, "state": k + 1,
                             "basis": basis})
                names.append(f"scatter_{label}_{k + 1}.csv")
        if family == "tw":
            factory = lambda S: TWPopulationAccumulator(S, channels, basis)
        elif family == "cps":
            factory = lambda S: NaFAccumulator(
                S, [((occ0, occ0, k, k), o) for k, o in channels], basis, variant.gamma)
        else:
            factory = lambda S: DensityAccumulator(
                S, [((k, k), o) for k, o in channels], basis, fssh=(family == "fssh"))
        return ResolvedRequest(factory, desc, names)

    raise ValueError(f"unknown estimator kind {kind!r}")


def _required_electronic_init(resolved, model):
    pairs = {r.init_pair for r in resolved if r.init_pair is not None}
    if len(pairs) > 1:
        raise ValueError("estimator requests need conflicting initial coherence pairs")
    if pairs:
        n, m = sorted(next(iter(pairs)))
        return ElectronicInit("coherence", (n, m), model.init.electronic.basis)
    return None


# ---------------------------------------------------------------------------
# block execution

_MODEL_CACHE = {}


def _cached_model(cfg_blob):
    if cfg_blob not in _MODEL_CACHE:
        doc = json.loads(cfg_blob)
        _MODEL_CACHE.clear()
        _MODEL_CACHE[cfg_blob] = build_model(doc["name"], doc["params"])
    return _MODEL_CACHE[cfg_blob]


class _HopUniforms:
    """Chunked per-trajectory uniforms for hop decisions, drawn in stream order."""

    def __init__(self, rngs, chunk=2048):
        self.rngs = rngs
        self.chunk = chunk
        self.buf = None
        self.pos = 0

    def __call__(self, step):
        if self.buf is None or self.pos >= self.buf.shape[1]:
            self.buf = np.stack([r.random(self.chunk) for r in self.rngs])
            self.pos = 0
        col = self.buf[:, self.pos]
        self.pos += 1
        return col


def _run_block(args):
    (cfg_blob, method_cfg, requests_cfg, dt, n_steps, stride, seed,
     block_index, start, size) = args
    model = _cached_model(cfg_blob)
    variant = make_variant(method_cfg)
    resolved = [resolve_request(r, model, variant) for r in requests_cfg]
    electronic = _required_electronic_init(resolved, model)

    rngs = [trajectory_rng(seed, s) for s in range(start, start + size)]
    state, init_record = initialize_ensemble(model, variant, rngs, electronic)

    snap_steps = list(range(0, n_steps + 1, stride))
    n_times = len(snap_steps)
    accs = [r.factory(n_times) for r in resolved]
    for acc in accs:
        acc.start(state, init_record, model)

    def on_snapshot(step, st):
        view = SnapshotView(st, model)
        s_idx = step // stride
        for acc in accs:
            acc.add(s_idx, view)

    hop = _HopUniforms(rngs) if variant.family == "fssh" else None
    final = propagate_ensemble(model, variant, state, dt, n_steps, snap_steps,
                               on_snapshot, hop_uniforms=hop)
    stats = {"failed": int(final.failed.sum()),
             "degenerate": int(final.degenerate_count)}
    return block_index, [acc.partials() for acc in accs], stats


@dataclass
class RunReport:
    series: dict  # filename -> EstimateSeries
    times: np.ndarray
    n_traj: int
    n_failed: int
    n_degenerate: int
    wall_time: float
    manifest: dict
    out_dir: str

    @property
    def ok(self):
        return self.n_failed < FAILURE_GATE * max(self.n_traj, 1)


def run(config, write=True):
    """Execute a run configuration; returns a RunReport (CSV + manifest on
    disk unless write=False)."""
    if isinstance(config, dict):
        config = RunConfig.from_dict(config)
    t_start = _time.perf_counter()
    model = build_model(config.model_name, config.model_params)
    variant = make_variant(config.method)
    dt = config.dt if config.dt else default_dt(model)
    n_steps = int(round(config.t_max / dt))
    if n_steps < 1:
        raise ValueError("t_max must cover at least one step")
    stride = max(config.stride, 1)
    snap_steps = list(range(0, n_steps + 1, stride))
    times = np.array(snap_steps) * dt

    resolved = [resolve_request(r, model, variant) for r in config.estimators]
    _required_electronic_init(resolved, model)  # validate compatibility early

    cfg_blob = json.dumps({"name": config.model_name, "params": config.model_params},
                          sort_keys=True, default=float)
    blocks = []
    start = 0
    bi = 0
    while start < config.ensemble:
        size = min(config.block_size, config.ensemble - start)
        blocks.append((cfg_blob, config.method, config.estimators, dt, n_steps,
                       stride, config.seed, bi, start, size))
        start += size
        bi += 1

    workers = config.workers or int(os.environ.get(WORKERS_ENV, "0") or 0) or 1
    results = [None] * len(blocks)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for block_index, parts, stats in pool.map(_run_block, blocks):
                results[block_index] = (parts, stats)
    else:
        for args in blocks:
            block_index, parts, stats = _run_block(args)
            results[block_index] = (parts, stats)

    n_failed = sum(st["failed"] for _, st in results)
    n_degenerate = sum(st["degenerate"] for _, st in results)

    series = {}
    for i, rr in enumerate(resolved):
        parts_list = [parts[i] for parts, _ in results]
        for fname, es in rr.finalize(parts_list, times, _base_descriptor(config, model)):
            series[fname] = es

    wall = _time.perf_counter() - t_start
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "dt": dt,
        "seed": config.seed,
        "n_traj": config.ensemble,
        "n_failed": n_failed,
        "n_degenerate": n_degenerate,
        "wall_time_s": round(wall, 3),
        "outputs": sorted(series),
    }
    report = RunReport(series, times, config.ensemble, n_failed, n_degenerate,
                       wall, manifest, config.out)
    if write:
        os.makedirs(config.out, exist_ok=True)
        for fname, es in series.items():
            es.to_csv(os.path.join(config.out, fname))
        with open(os.path.join(config.out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
    return report


def _base_descriptor(config, model):
    return {"model": model.name, "method": config.method["name"],
            "seed": config.seed, "n_traj": config.ensemble}


# ---------------------------------------------------------------------------
# parameter sweeps


def _set_dotted(doc, path, value):
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def sweep(config_doc, parameter, values, write=True):
    """One run per parameter value plus a combined final-time CSV."""
    reports = []
    rows = []
    base_out = config_doc.get("out", "runs/sweep")
    for v in values:
        doc = json.loads(json.dumps(config_doc))  # deep copy
        _set_dotted(doc, parameter, v)
        doc["out"] = os.path.join(base_out, f"{parameter.split('.')[-1]}={v:g}")
        report = run(doc, write=write)
        reports.append(report)
        for fname, es in sorted(report.series.items()):
            val = es.values[-1]
            rows.append((v, fname.removesuffix(".csv"), es.times[-1],
                         val, es.stderr[-1], es.n_traj[-1]))
    if write:
        os.makedirs(base_out, exist_ok=True)
        path = os.path.join(base_out, "sweep.csv")
        with open(path, "w") as fh:
            fh.write(f"# nafdyn-sweep v1 parameter={parameter}\n")
            fh.write("param,series,time,re,im,stderr,n_traj\n")
            for v, name, t, val, err, n in rows:
                val = complex(val)
                if np.isnan(val.real):
                    fh.write(f"{float(v)!r},{name},{float(t)!r},,,,{int(n)}\n")
                else:
                    fh.write(f"{float(v)!r},{name},{float(t)!r},{val.real!r},"
                             f"{val.imag!r},{float(err)!r},{int(n)}\n")
    return reports, rows


# ---------------------------------------------------------------------------
# verification suites


def verify(suite, samples=None, seed=2024, out=print):
    """Run a named oracle suite; prints one pass/fail line per identity and
    returns True when everything passed."""
    from . import exact

    rng = trajectory_rng(seed, 0)
    ok = True
    if suite == "windows":
        n = samples or 10_000_000
        for F in (2, 3):
            for c in exact.mc_verify_window_integrals(F, n, rng):
                line = c.line() + f" (F={F})"
                out(line)
                ok &= c.passed
    elif suite == "frozen":
        n = samples or 1_000_000
        for F in (2, 3):
            for c in exact.mc_verify_frozen_identities(F, n, rng):
                out(c.line() + f" (F={F})")
                ok &= c.passed
    elif suite == "sqz":
        n = samples or 1_000_000
        h = rng.standard_normal((2, 2))
        H = 0.5 * (h + h.T)
        w = np.linalg.eigvalsh(H)
        t_grid = np.linspace(0.0, 2 * np.pi / (w[1] - w[0]), 5)
        for row in exact.mc_verify_sqz_equivalence(0.5, H, t_grid, n, rng):
            sig = max(np.hypot(row["tw_err"] or 0.0, row["sqz_err"] or 0.0), 1e-4)
            passed = abs(row["tw"] - row["sqz"]) <= 3 * sig \
                and abs(row["tw"] - row["exact"]) <= 3 * max(row["tw_err"] or 0, 1e-4) \
                and abs(row["sqz"] - row["exact"]) <= 3 * max(row["sqz_err"] or 0, 1e-4)
            out(f"[{'PASS' if passed else 'FAIL'}] sqz vs tw t={row['t']:.3f} "
                f"state {row['state'] + 1}: tw={row['tw']:.5f} sqz={row['sqz']:.5f} "
                f"exact={row['exact']:.5f}")
            ok &= passed
    elif suite == "dvr-sanity":
        ok = _verify_dvr_sanity(out)
    else:
        raise ValueError(f"unknown verify suite {suite!r}")
    return ok


def _verify_dvr_sanity(out):
    from .dvr import (
        DVRGrid,
        WavepacketState,
        dvr_hamiltonian,
        dvr_propagate,
        gaussian_packet,
        norm,
    )
    from .models import Free1D, Harmonic1D

    ok = True
    # harmonic ground energy
    omega, mass = 0.005, 2000.0
    grid = DVRGrid(-8.0, 8.0, 256, mass)
    H = dvr_hamiltonian(Harmonic1D(omega, mass), grid)
    e0 = float(np.linalg.eigvalsh(H.dense())[0])
    passed = abs(e0 - omega / 2) <= 1e-6
    out(f"[{'PASS' if passed else 'FAIL'}] harmonic ground energy: {e0:.8f} vs {omega / 2:.8f}")
    ok &= passed

    # free-particle dispersion
    mass, alpha = 1000.0, 1.0
    grid = DVRGrid(-60.0, 60.0, 1024, mass)
    H = dvr_hamiltonian(Free1D(mass), grid)
    psi0 = WavepacketState(gaussian_packet(grid, 0.0, 0.0, alpha)[:, None], 0.0)
    t_final = 4000.0
    states = dvr_propagate(psi0, H, [t_final])
    dens = np.abs(states[-1].psi[:, 0]) ** 2 * grid.dr
    var = float(np.sum(dens * grid.points**2) - np.sum(dens * grid.points) ** 2)
    sigma0_sq = 1.0 / (2 * alpha)
    expect = sigma0_sq + t_final**2 / (4 * mass**2 * sigma0_sq)
    passed = abs(var - expect) <= 1e-6 * max(expect, 1.0)
    out(f"[{'PASS' if passed else 'FAIL'}] free dispersion: {var:.8f} vs {expect:.8f}")
    ok &= passed
    nrm = norm(states[-1], grid)
    passed = abs(nrm - 1.0) <= 1e-8
    out(f"[{'PASS' if passed else 'FAIL'}] norm conservation: {nrm:.12f}")
    ok &= passed
    return ok
