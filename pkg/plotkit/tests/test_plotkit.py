import numpy as np
import pytest
import yaml

from plotkit import SchemaError, load_recipe, plot_series, read_series, read_sweep
from plotkit.cli import main as cli_main


def write_series(path, descriptor, rows):
    """rows: (time, value or None, stderr, n)"""
    with open(path, "w") as fh:
        fh.write("# nafdyn-series v1\n")
        fh.write("# descriptor: " + __import__("json").dumps(descriptor) + "\n")
        fh.write("time,re,im,stderr,n_traj\n")
        for t, v, s, n in rows:
            if v is None:
                fh.write(f"{float(t)!r},,,,{n}\n")
            else:
                v = complex(v)
                fh.write(f"{float(t)!r},{v.real!r},{v.imag!r},{float(s)!r},{n}\n")


def make_popdiff(path, gap_at=None):
    t = np.linspace(0.0, 15.0, 40)
    vals = np.cos(0.8 * t) * np.exp(-t / 9.0)
    rows = []
    for i, (ti, vi) in enumerate(zip(t, vals)):
        if gap_at is not None and i in gap_at:
            rows.append((ti, None, 0.0, 100))
        else:
            rows.append((ti, vi, 0.01, 100))
    write_series(path, {"kind": "population_difference", "basis": "diabatic"}, rows)


def make_coherence(path):
    t = np.linspace(0.0, 15.0, 40)
    vals = 0.5 * np.exp(1j * 1.3 * t) * np.exp(-t / 7.0)
    write_series(path, {"kind": "coherence", "pair": [1, 2]},
                 [(ti, vi, 0.005, 100) for ti, vi in zip(t, vals)])


def make_sweep(path):
    p0 = np.arange(2.0, 51.0, 2.0)
    with open(path, "w") as fh:
        fh.write("# nafdyn-sweep v1 parameter=model.params.p0\n")
        fh.write("param,series,time,re,im,stderr,n_traj\n")
        for v in p0:
            t1 = 1.0 / (1.0 + np.exp(-(v - 28.0) / 3.0))
            for name, val in (("scatter_transmit_1", 1 - t1),
                              ("scatter_transmit_2", t1),
                              ("scatter_reflect_1", 0.3 * np.exp(-v / 10.0)),
                              ("scatter_reflect_2", 0.1 * np.exp(-v / 8.0))):
                fh.write(f"{float(v)!r},{name},100.0,{float(val)!r},0.0,0.01,500\n")


def make_phist(path):
    centers = np.arange(-39.5, 40.0, 1.0)
    dens = np.exp(-0.5 * (centers - 34.0) ** 2) + 0.4 * np.exp(-0.5 * (centers + 20.0) ** 2)
    dens /= dens.sum()
    write_series(path, {"kind": "momentum_histogram", "abscissa": "momentum",
                        "at_time": 2800.0},
                 [(c, d, 0.001, 500) for c, d in zip(centers, dens)])


def test_read_series_with_gaps(tmp_path):
    path = tmp_path / "d.csv"
    make_popdiff(path, gap_at={7, 8})
    s = read_series(path)
    assert np.isnan(s.values[7].real) and np.isnan(s.values[8].real)
    assert s.descriptor["kind"] == "population_difference"
    assert len(s.x) == 40


def test_schema_errors_are_descriptive(tmp_path):
    missing = tmp_path / "nope.csv"
    bad = tmp_path / "bad.csv"
    bad.write_text("time,re\n0,1\n")
    with pytest.raises(SchemaError, match="nope.csv"):
        read_series(missing)
    with pytest.raises(SchemaError, match="expected"):
        read_series(bad)
    garbled = tmp_path / "garbled.csv"
    garbled.write_text("# nafdyn-series v1\n# descriptor: {}\n"
                       "time,re,im,stderr,n_traj\n0.0,x,0,0,5\n")
    with pytest.raises(SchemaError, match="garbled.csv:4"):
        read_series(garbled)


def test_figure1_style_recipe_renders_with_gaps(tmp_path):
    make_popdiff(tmp_path / "popdiff.csv", gap_at={20})
    make_coherence(tmp_path / "coh.csv")
    recipe = {
        "title": "two-state relaxation",
        "output": str(tmp_path / "fig1.png"),
        "layout": [1, 2],
        "panels": [
            {"title": "population difference", "xlabel": "time", "ylabel": "D(t)",
             "series": [{"csv": str(tmp_path / "popdiff.csv"),
                         "label": "naf-tw", "style": "naf-tw"}]},
            {"title": "coherence", "xlabel": "time", "ylabel": "|rho12|",
             "magnitude": True,
             "series": [{"csv": str(tmp_path / "coh.csv"),
                         "label": "naf-tw", "style": "naf-tw"}]},
        ],
    }
    rpath = tmp_path / "recipe.yaml"
    rpath.write_text(yaml.safe_dump(recipe))
    loaded = load_recipe(rpath)
    # the gap survives into the plotted line data (drawn as a break, never
    # interpolated)
    import matplotlib.pyplot as plt

    out = plot_series(loaded)
    assert (tmp_path / "fig1.png").exists()
    y = loaded.panels[0].series[0].data.values.real
    assert np.isnan(y[20])


def test_figure7_style_recipe_renders(tmp_path):
    make_sweep(tmp_path / "sweep.csv")
    make_phist(tmp_path / "phist_a.csv")
    make_phist(tmp_path / "phist_b.csv")
    panels = []
    for name in ("scatter_transmit_1", "scatter_transmit_2",
                 "scatter_reflect_1", "scatter_reflect_2"):
        panels.append({
            "title": name, "xlabel": "P0", "ylabel": "probability",
            "series": [{"csv": str(tmp_path / "sweep.csv"), "select": name,
                        "label": "naf-tw", "style": "naf-tw"}]})
    for tag in ("a", "b"):
        panels.append({
            "title": f"momentum distribution {tag}", "xlabel": "momentum",
            "ylabel": "density",
            "series": [{"csv": str(tmp_path / f"phist_{tag}.csv"),
                        "label": "exact", "style": "exact"}]})
    recipe = {"output": str(tmp_path / "fig7.png"), "layout": [3, 2],
              "panels": panels}
    out = plot_series(load_recipe_from_dict_helper(recipe))
    assert (tmp_path / "fig7.png").exists()


def load_recipe_from_dict_helper(doc):
    from plotkit import recipe_from_dict

    return recipe_from_dict(doc)


def test_recipe_validation(tmp_path):
    make_popdiff(tmp_path / "ok.csv")
    base = {"output": str(tmp_path / "f.png"),
            "panels": [{"series": [{"csv": str(tmp_path / "ok.csv")}]}]}
    load_recipe_from_dict_helper(base)  # valid
    with pytest.raises(SchemaError, match="missing.csv"):
        load_recipe_from_dict_helper({
            "output": str(tmp_path / "f.png"),
            "panels": [{"series": [{"csv": str(tmp_path / "missing.csv")}]}]})
    with pytest.raises(SchemaError, match="unknown keys"):
        load_recipe_from_dict_helper({**base, "typo": 1})
    with pytest.raises(SchemaError, match="select"):
        make_sweep(tmp_path / "sw.csv")
        load_recipe_from_dict_helper({
            "output": str(tmp_path / "f.png"),
            "panels": [{"series": [{"csv": str(tmp_path / "sw.csv")}]}]})


def test_identical_inputs_identical_bytes(tmp_path):
    make_popdiff(tmp_path / "p.csv")
    recipe = {"output": str(tmp_path / "out1.png"),
              "panels": [{"series": [{"csv": str(tmp_path / "p.csv"),
                                      "label": "x", "style": "sqc-tw"}]}]}
    plot_series(load_recipe_from_dict_helper(recipe))
    recipe["output"] = str(tmp_path / "out2.png")
    plot_series(load_recipe_from_dict_helper(recipe))
    assert (tmp_path / "out1.png").read_bytes() == (tmp_path / "out2.png").read_bytes()


def test_cli(tmp_path, capsys):
    make_popdiff(tmp_path / "p.csv")
    recipe = {"output": str(tmp_path / "cli.png"),
              "panels": [{"series": [{"csv": str(tmp_path / "p.csv")}]}]}
    rpath = tmp_path / "r.yaml"
    rpath.write_text(yaml.safe_dump(recipe))
    assert cli_main(["plot", "--recipe", str(rpath)]) == 0
    assert (tmp_path / "cli.png").exists()
