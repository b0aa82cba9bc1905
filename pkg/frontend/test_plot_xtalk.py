"""Tests for the CSV figure renderer (run with pytest from frontend/)."""

import os

import pytest

import plot_xtalk


LEAKAGE_CSV = """# delta_ghz,leak_q0_200,leak_q1_002,flags
0.02,1e-6,2e-5,
0.30,1e-4,5e-2,collision:delta-eta1
0.40,2e-5,1e-3,
"""

INFIDELITY_CSV = """# delta_ghz,p,omega_c_ghz,infidelity_ideal,infidelity_crosstalk,infidelity_mitigated,leak_q0_200,leak_q1_002,theta0_over_2pi,phi0_over_2pi,lambda0_over_2pi,theta1_over_2pi,phi1_over_2pi,lambda1_over_2pi,evals,flags
0.10,0.1,6.4,3e-05,2.5e-03,4e-05,1e-6,1e-5,0.704,0.277,0.02,0.987,0.79,0.56,220,
0.30,0.1,6.5,7e-05,1.2e-02,1.2e-02,1e-5,1.4e-02,0.704,0.277,0.02,0.987,0.79,0.56,240,
0.50,0.1,6.7,5e-05,4e-04,1e-04,1e-6,1e-4,0.704,0.277,0.02,0.987,0.79,0.56,210,
"""

COUPLING_CSV = """# omega_c_ghz,j_ghz,zeta_ghz
6.2,0.002,-0.0002
6.5,-0.0001,0.00001
7.0,-0.001,0.0001
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize("kind,text", [
    ("leakage", LEAKAGE_CSV),
    ("infidelity", INFIDELITY_CSV),
    ("coupling", COUPLING_CSV),
])
def test_render_each_kind(tmp_path, kind, text):
    csv = _write(tmp_path, f"{kind}.csv", text)
    out = str(tmp_path / f"{kind}.png")
    plot_xtalk.render(kind, csv, out)
    assert os.path.exists(out)
    assert os.path.getsize(out) > 1000


def test_infidelity_figure_has_three_curves_and_two_bands(tmp_path, monkeypatch):
    csv = _write(tmp_path, "inf.csv", INFIDELITY_CSV)
    out = str(tmp_path / "inf.png")
    captured = {}

    import matplotlib.pyplot as plt
    orig = plt.subplots

    def spy(*args, **kwargs):
        fig, ax = orig(*args, **kwargs)
        captured["ax"] = ax
        return fig, ax

    monkeypatch.setattr(plt, "subplots", spy)
    plot_xtalk.render("infidelity", csv, out)
    ax = captured["ax"]
    assert len(ax.lines) == 3
    labels = {line.get_label() for line in ax.lines}
    assert labels == {"Ideal", "Crosstalk", "Mitigation"}
    assert len(ax.patches) == 2  # straddling + beyond-straddling bands
    assert ax.get_yscale() == "log"


def test_schema_mismatch_names_missing_column(tmp_path):
    csv = _write(tmp_path, "bad.csv", LEAKAGE_CSV)  # has delta_ghz, no fidelities
    out = str(tmp_path / "bad.png")
    with pytest.raises(plot_xtalk.SchemaError, match="infidelity_ideal"):
        plot_xtalk.render("infidelity", csv, out)
    assert not os.path.exists(out)

    csv2 = _write(tmp_path, "bad2.csv", COUPLING_CSV)
    with pytest.raises(plot_xtalk.SchemaError, match="delta_ghz"):
        plot_xtalk.render("leakage", csv2, str(tmp_path / "bad2.png"))


def test_empty_csv_is_rejected_without_output(tmp_path):
    csv = _write(tmp_path, "empty.csv", "# delta_ghz,leak_q0_200,leak_q1_002\n")
    out = str(tmp_path / "empty.png")
    with pytest.raises(plot_xtalk.SchemaError):
        plot_xtalk.render("leakage", csv, out)
    assert not os.path.exists(out)


def test_cli_roundtrip(tmp_path):
    csv = _write(tmp_path, "leak.csv", LEAKAGE_CSV)
    out = str(tmp_path / "leak.png")
    assert plot_xtalk.main(["--kind", "leakage", "--csv", csv, "--out", out]) == 0
    assert os.path.exists(out)
    assert plot_xtalk.main(["--kind", "infidelity", "--csv", csv, "--out",
                            str(tmp_path / "x.png")]) == 1
    assert not os.path.exists(str(tmp_path / "x.png"))
