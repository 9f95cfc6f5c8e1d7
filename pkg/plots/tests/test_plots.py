import math

import numpy as np
import pytest

from dynwave_plots.compare import main as compare_main
from dynwave_plots.convergence import fitted_slope, main as convergence_main
from dynwave_plots.csvio import CsvFormatError, read_convergence, read_energy, read_snapshots
from dynwave_plots.energy import main as energy_main
from dynwave_plots.waterfall import main as waterfall_main


def write_snapshots(path, n_times=5, width=9, stride=2):
    with open(path, "w", newline="\n") as fh:
        fh.write("n,t,k,x,u\n")
        for i in range(n_times):
            n = i * stride
            t = 0.1 * n
            for k in range(width):
                x = 0.5 * k
                u = math.sin(x + t)
                fh.write(f"{n},{t!r},{k},{x!r},{u!r}\n")


def write_energy(path, n_rows=20, j0=1.25, wobble=0.0):
    with open(path, "w", newline="\n") as fh:
        fh.write("n,t,J,delta,drift\n")
        for n in range(1, n_rows + 1):
            j = j0 + wobble * math.sin(n)
            fh.write(f"{n},{0.05 * n!r},{j!r},0.0,0.0\n")


def write_convergence(path, slope=2.0, levels=4, tail_zero=False):
    with open(path, "w", newline="\n") as fh:
        fh.write("level,K,N,dx,dt,err_l2,err_h1,err_composite,observed_order\n")
        for lev in range(levels):
            dx = 0.24 / 2**lev
            err = 0.1 * dx**slope
            if tail_zero and lev == levels - 1:
                err = 0.0
            order = "" if lev == 0 else f"{slope!r}"
            fh.write(f"{lev},{25 * 2**lev},{100 * 2**lev},{dx!r},{dx / 4!r},"
                     f"{err!r},{err!r},{err!r},{order}\n")


def test_waterfall_renders(tmp_path):
    csv = tmp_path / "snapshots.csv"
    out = tmp_path / "waterfall.png"
    write_snapshots(csv)
    assert waterfall_main([str(csv), "-o", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_energy_flat_line_renders(tmp_path):
    csv = tmp_path / "energy.csv"
    out = tmp_path / "energy.png"
    write_energy(csv, wobble=0.0)
    assert energy_main([str(csv), "-o", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_energy_multiple_series(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    out = tmp_path / "energy.png"
    write_energy(a, j0=1.0)
    write_energy(b, j0=2.0, wobble=0.01)
    assert energy_main([str(a), str(b), "-o", str(out)]) == 0
    assert out.exists()


def test_compare_renders(tmp_path):
    a = tmp_path / "dyn.csv"
    b = tmp_path / "neu.csv"
    out = tmp_path / "compare.png"
    write_snapshots(a)
    write_snapshots(b, n_times=5)
    assert compare_main([str(a), str(b), "-o", str(out)]) == 0
    assert out.exists()


def test_convergence_renders_and_prints_slope(tmp_path, capsys):
    csv = tmp_path / "convergence.csv"
    out = tmp_path / "convergence.png"
    write_convergence(csv, slope=2.0)
    assert convergence_main([str(csv), "-o", str(out)]) == 0
    assert out.exists()
    printed = capsys.readouterr().out
    assert printed.startswith("fitted slope ")
    slope = float(printed.split()[-1])
    cols = read_convergence(csv)
    expected = fitted_slope(cols["dx"], cols["err_composite"])
    assert abs(slope - expected) <= 1e-6
    assert expected == pytest.approx(2.0, abs=1e-12)


def test_convergence_skips_zero_error_rows(tmp_path):
    csv = tmp_path / "convergence.csv"
    out = tmp_path / "convergence.png"
    write_convergence(csv, slope=2.0, tail_zero=True)
    assert convergence_main([str(csv), "-o", str(out)]) == 0


def test_missing_column_is_an_error(tmp_path, capsys):
    csv = tmp_path / "energy.csv"
    csv.write_text("n,t,J,delta\n1,0.1,1.0,0.0\n")
    out = tmp_path / "x.png"
    assert energy_main([str(csv), "-o", str(out)]) == 1
    assert "expected header" in capsys.readouterr().err
    assert not out.exists()


def test_bad_cell_names_the_row(tmp_path, capsys):
    csv = tmp_path / "energy.csv"
    csv.write_text("n,t,J,delta,drift\n1,0.1,1.0,0.0,0.0\n2,0.2,oops,0.0,0.0\n")
    out = tmp_path / "x.png"
    assert energy_main([str(csv), "-o", str(out)]) == 1
    err = capsys.readouterr().err
    assert "row 2" in err and "J" in err


def test_short_row_names_the_row(tmp_path):
    csv = tmp_path / "snapshots.csv"
    csv.write_text("n,t,k,x,u\n0,0.0,0,0.0,1.0\n0,0.0,1\n")
    with pytest.raises(CsvFormatError, match="row 2"):
        read_snapshots(csv)


def test_empty_table_is_an_error(tmp_path):
    csv = tmp_path / "energy.csv"
    csv.write_text("n,t,J,delta,drift\n")
    with pytest.raises(CsvFormatError, match="no data rows"):
        read_energy(csv)


def test_missing_file_is_an_error(tmp_path, capsys):
    out = tmp_path / "x.png"
    assert waterfall_main([str(tmp_path / "nope.csv"), "-o", str(out)]) == 1
    assert "nope.csv" in capsys.readouterr().err


def test_unequal_snapshot_blocks_rejected(tmp_path):
    csv = tmp_path / "snapshots.csv"
    csv.write_text(
        "n,t,k,x,u\n"
        "0,0.0,0,0.0,1.0\n0,0.0,1,0.5,1.0\n"
        "2,0.2,0,0.0,1.0\n2,0.2,1,0.5,1.0\n2,0.2,2,1.0,1.0\n"
    )
    with pytest.raises(CsvFormatError, match="unequal"):
        read_snapshots(csv)


def test_read_snapshots_shapes(tmp_path):
    csv = tmp_path / "snapshots.csv"
    write_snapshots(csv, n_times=4, width=7)
    t, x, u = read_snapshots(csv)
    assert t.shape == (4,) and x.shape == (7,) and u.shape == (4, 7)
    assert u[2, 3] == pytest.approx(math.sin(0.5 * 3 + t[2]))


def test_scripts_do_not_modify_inputs(tmp_path):
    csv = tmp_path / "energy.csv"
    write_energy(csv)
    before = csv.read_bytes()
    assert energy_main([str(csv), "-o", str(tmp_path / "e.png")]) == 0
    assert csv.read_bytes() == before


def test_observed_order_column_may_be_empty(tmp_path):
    csv = tmp_path / "convergence.csv"
    write_convergence(csv)
    cols = read_convergence(csv)
    assert np.isnan(cols["observed_order"][0])
    assert cols["observed_order"][1] == pytest.approx(2.0)


def test_fitted_slope_needs_two_positive_rows():
    with pytest.raises(CsvFormatError):
        fitted_slope(np.array([0.1, 0.05]), np.array([0.0, 0.0]))
