"""Secondary acceptance: all four figure commands succeed on real solver
output (the conservation run and the convergence study at their gate
parameters) and the convergence plot's annotated slope is second order."""

import subprocess
import sys

import pytest

from dynwave_plots.compare import main as compare_main
from dynwave_plots.convergence import main as convergence_main
from dynwave_plots.energy import main as energy_main
from dynwave_plots.waterfall import main as waterfall_main

BASE_CONFIG = """\
[grid]
L = 6.0
T = 5.0
K = 100
N = 2000

[problem]
nonlinearity = cubic
preset = case1

[solver]
tol = 1e-13
"""


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "dynwave", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def solver_outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("solver")
    config = root / "experiment.ini"
    config.write_text(BASE_CONFIG)

    dyn = root / "dynamic"
    neu = root / "neumann"
    conv = root / "study"
    run_cli("run", str(config), "--set", f"output.outdir={dyn}")
    run_cli("run", str(config), "--set", f"output.outdir={neu}", "--set", "problem.bc=neumann")
    run_cli(
        "converge", str(config), "--levels", "4",
        "--set", f"output.outdir={conv}",
        "--set", "grid.T=1.0", "--set", "grid.K=25", "--set", "grid.N=100",
    )
    return dyn, neu, conv


def test_criterion_11_figure_commands(solver_outputs, tmp_path, capsys):
    dyn, neu, conv = solver_outputs

    rc_waterfall = waterfall_main([str(dyn / "snapshots.csv"), "-o", str(tmp_path / "wf.png")])
    rc_energy = energy_main([str(dyn / "energy.csv"), "-o", str(tmp_path / "en.png")])
    rc_compare = compare_main(
        [str(dyn / "snapshots.csv"), str(neu / "snapshots.csv"), "-o", str(tmp_path / "cm.png")]
    )
    rc_convergence = convergence_main(
        [str(conv / "convergence.csv"), "-o", str(tmp_path / "cv.png")]
    )
    printed = capsys.readouterr().out
    slope = float(printed.strip().split()[-1])

    ok = (
        rc_waterfall == rc_energy == rc_compare == rc_convergence == 0
        and all((tmp_path / name).stat().st_size > 0 for name in ("wf.png", "en.png", "cm.png", "cv.png"))
        and 1.8 <= slope <= 2.2
    )
    print(
        f"criterion 11 [{'PASS' if ok else 'FAIL'}] figure commands: exit codes "
        f"{(rc_waterfall, rc_energy, rc_compare, rc_convergence)}, fitted slope {slope:.3f}"
    )
    assert ok
