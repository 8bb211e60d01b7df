"""Model construction from config params and from YAML model files.

File schema (YAML):

    kind: lvcm            # spin_boson | fmo | cavity | lvcm | morse | tully | et
    name: my_model        # optional
    units: au             # au | ev | cm-1  (energy-like entries are converted)
    params: {...}         # builder keyword arguments

Unknown keys anywhere are hard errors.
"""

import numpy as np
import yaml

from . import models
from .baths import discretize_debye, discretize_ohmic
from .units import cm1_to_au

EV_TO_AU = 1.0 / 27.211386245988


def _convert_energy(value, units):
    arr = np.asarray(value, float)
    if units == "au":
        return arr
    if units == "ev":
        return arr * EV_TO_AU
    if units == "cm-1":
        return cm1_to_au(arr)
    raise ValueError(f"unknown unit system {units!r}")


def _check_keys(d, allowed, where):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


def _build_spin_boson(params):
    _check_keys(params, {"eps", "delta", "alpha", "omega_c", "nb", "beta"}, "spin_boson params")
    bath = discretize_ohmic(params.get("alpha", 0.1), params.get("omega_c", 1.0),
                            int(params.get("nb", 300)))
    return models.build_spin_boson(params.get("eps", 0.0), params.get("delta", 1.0),
                                   bath, beta=params.get("beta", 5.0))


def _build_fmo(params):
    _check_keys(params, {"lambda_cm1", "omega_c_cm1", "nb", "temperature", "initial_site"},
                "fmo params")
    bath = discretize_debye(cm1_to_au(params.get("lambda_cm1", 35.0)),
                            cm1_to_au(params.get("omega_c_cm1", 106.14)),
                            int(params.get("nb", 100)))
    site = int(params.get("initial_site", 1)) - 1  # config is 1-based
    return models.build_fmo(bath, temperature=params.get("temperature", 77.0),
                            initial_site=site)


def _build_cavity(params, two_level):
    _check_keys(params, {"nmodes", "L", "r0", "levels", "dipoles"}, "cavity params")
    kwargs = dict(nmodes=int(params.get("nmodes", 400)), L=params.get("L", 236200.0),
                  r0=params.get("r0"), two_level=two_level)
    if "levels" in params:
        kwargs["levels"] = np.asarray(params["levels"], float)
    if "dipoles" in params:
        kwargs["dipoles"] = np.asarray(params["dipoles"], float)
    return models.build_cavity(**kwargs)


def _build_lvcm(params, units="au"):
    _check_keys(params, {"energies", "omegas", "kappa", "lambda", "units"}, "lvcm params")
    units = params.get("units", units)
    energies = _convert_energy(params["energies"], units)
    omegas = _convert_energy(params["omegas"], units)
    kappa = _convert_energy(params["kappa"], units)
    lam = _convert_energy(params["lambda"], units)
    return models.build_lvcm(energies, omegas, kappa, lam)


def _build_morse(params, units="au"):
    _check_keys(params, {"d", "beta", "r_min", "c", "a", "alpha", "r_g", "mass", "units"},
                "morse params")
    units = params.get("units", units)
    return models.build_morse3(
        _convert_energy(params["d"], units), np.asarray(params["beta"], float),
        np.asarray(params["r_min"], float), _convert_energy(params["c"], units),
        _convert_energy(params["a"], units), np.asarray(params["alpha"], float),
        np.asarray(params["r_g"], float), mass=params.get("mass", 20000.0))


def _build_tully(variant, params):
    allowed = set(models.TULLY_DEFAULTS[variant]) | {"mass"}
    _check_keys(params, allowed, f"tully_{variant} params")
    return models.build_tully(variant, **params)


def _build_et(params):
    _check_keys(params, {"eps", "nb", "temperature", "Omega", "lambda", "delta",
                         "kondo_alpha"}, "et params")
    kwargs = {"eps": params["eps"], "nb": int(params.get("nb", 100)),
              "temperature": params.get("temperature", 300.0)}
    if "Omega" in params:
        kwargs["Omega"] = params["Omega"]
    if "lambda" in params:
        kwargs["lambda_reorg"] = params["lambda"]
    if "delta" in params:
        kwargs["delta"] = params["delta"]
    if "kondo_alpha" in params:
        kwargs["kondo_alpha"] = params["kondo_alpha"]
    return models.build_et_model(**kwargs)


def build_model(name, params=None):
    """Construct a model from its registry name and a parameter mapping."""
    params = dict(params or {})
    if "file" in params:
        path = params.pop("file")
        if params:
            raise ValueError("model file and inline params are mutually exclusive")
        return load_model_file(path)
    if name == "spin_boson":
        return _build_spin_boson(params)
    if name == "fmo":
        return _build_fmo(params)
    if name == "cavity3":
        return _build_cavity(params, two_level=False)
    if name == "cavity2":
        return _build_cavity(params, two_level=True)
    if name == "lvcm":
        return _build_lvcm(params)
    if name == "morse3":
        return _build_morse(params)
    if name in ("tully_sac", "tully_dac", "tully_ecr"):
        return _build_tully(name.split("_")[1], params)
    if name == "et":
        return _build_et(params)
    raise ValueError(f"unknown model {name!r}")


def load_model_file(path):
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: model file must be a mapping")
    _check_keys(doc, {"kind", "name", "units", "params"}, str(path))
    kind = doc.get("kind")
    params = dict(doc.get("params") or {})
    if "units" in doc and "units" not in params:
        params["units"] = doc["units"]
    if kind == "lvcm":
        model = _build_lvcm(params)
    elif kind == "morse":
        model = _build_morse(params)
    elif kind in ("spin_boson", "fmo", "cavity", "et"):
        params.pop("units", None)
        model = build_model(kind if kind != "cavity" else "cavity3", params)
    elif kind == "tully":
        variant = params.pop("variant")
        params.pop("units", None)
        model = _build_tully(variant, params)
    else:
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    if doc.get("name"):
        model.name = doc["name"]
    return model


def save_model_file(path, kind, params, name=None, units="au"):
    doc = {"kind": kind, "units": units, "params": models._jsonify(params)}
    if name:
        doc["name"] = name
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
