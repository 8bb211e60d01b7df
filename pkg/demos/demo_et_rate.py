"""Electron-transfer rate from the flux-flux correlation function, compared
with the golden-rule (Marcus) expression at one energy bias.

The flux operator expands C_FF(t) over the four coherence-coherence
correlators of a coherence-initialized ensemble; the rate is the plateau of
the running time integral.
"""

import os

from nafdyn import runner
from nafdyn.estimators import flux_correlation_from_correlators, integrate_rate, marcus_rate
from nafdyn.modelfile import build_model

OUT = "runs/demo_et_rate"
LAMBDA = 2.39e-2
EPS = 0.5 * LAMBDA

model = build_model("et", {"eps": EPS, "nb": 100})
cfg = {
    "model": {"name": "et", "params": {"eps": EPS, "nb": 100}},
    "method": {"name": "naf-tw"},
    "ensemble": int(os.environ.get("ET_ENSEMBLE", "10000")),
    "dt": 25.0,
    "t_max": 3000.0,
    "stride": 2,
    "seed": 23,
    "block_size": 1000,
    "workers": int(os.environ.get("NAFDYN_WORKERS", "1")),
    "estimators": [
        {"kind": "correlation", "n": 1, "m": 2, "k": 1, "l": 2},
        {"kind": "correlation", "n": 1, "m": 2, "k": 2, "l": 1},
        {"kind": "correlation", "n": 2, "m": 1, "k": 1, "l": 2},
        {"kind": "correlation", "n": 2, "m": 1, "k": 2, "l": 1},
    ],
    "out": OUT,
}
report = runner.run(cfg)
cff = flux_correlation_from_correlators(
    report.series["corr_dia_n1m2k1l2.csv"].values,
    report.series["corr_dia_n1m2k2l1.csv"].values,
    report.series["corr_dia_n2m1k1l2.csv"].values,
    report.series["corr_dia_n2m1k2l1.csv"].values, model.delta)
rate, converged, running = integrate_rate(report.times, cff)
k_ref = marcus_rate(EPS, LAMBDA, model.delta, model.beta)

print(f"wall {report.wall_time:.0f}s; plateau converged: {converged}"
      + ("" if converged else " (raise ET_ENSEMBLE to sharpen the plateau)"))
print(f"flux-flux rate: {rate:.3e} a.u.")
print(f"golden rule:    {k_ref:.3e} a.u.  (ratio {rate / k_ref:.2f})")
print("running integral (every 6th point):")
for t, kk in list(zip(report.times, running))[::6]:
    print(f"  t={t:6.0f}  k(t)={kk:.3e}")
