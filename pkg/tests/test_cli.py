import os
import subprocess
import sys
from pathlib import Path

import pytest

from loophh.cli import main

LINE_GM = """\
# the scaling line modulo the rank-1 torus
[space]
generator x weight=1 aux=1
[group]
rank 1
[point]
z 2
[truncation]
aux_max 3
tower_levels 3
u_window 3
laurent_cap 4
[assert]
smooth true
regular_sequence true
"""

POINT_TRIVIAL = """\
[space]
[group]
rank 0
[point]
z
[truncation]
aux_max 2
[assert]
smooth true
"""

PLANE_OPPOSITE = """\
[space]
generator x weight=1 aux=1
generator y weight=-1 aux=1
[group]
rank 1
[point]
z 3
[truncation]
aux_max 2
tower_levels 2
u_window 3
laurent_cap 5
[assert]
smooth true
"""


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_hh_line_gm(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    code, out, _ = run_cli(["hh", str(f)], capsys)
    assert code == 0
    assert "loophh report v1" in out.splitlines()[0]
    # the k[z^+-] row: one line per group exponent
    for mu in (-4, -1, 0, 1, 4):
        assert f"0;{mu};0;0 -> 1" in out


def test_hh_point_trivial(tmp_path, capsys):
    f = tmp_path / "pt.loop"
    f.write_text(POINT_TRIVIAL)
    code, out, _ = run_cli(["hh", str(f)], capsys)
    assert code == 0
    assert "0;;0;0 -> 1" in out


def test_hh_plane_opposite_weights(tmp_path, capsys):
    f = tmp_path / "plane.loop"
    f.write_text(PLANE_OPPOSITE)
    code, out, _ = run_cli(["hh", str(f)], capsys)
    assert code == 0


def test_hp_line(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    code, out, _ = run_cli(["hp", str(f)], capsys)
    assert code == 0
    assert "HP table:" in out


def test_localize_line(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    code, out, _ = run_cli(["localize", str(f)], capsys)
    assert code == 0, out
    assert "verdict: PASS" in out


def test_fixed_fiber(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    code, out, _ = run_cli(["fixed-fiber", str(f)], capsys)
    assert code == 0, out


def test_unipotent_check(capsys):
    code, out, _ = run_cli(["unipotent-check"], capsys)
    assert code == 0
    assert "unipotent-formal-tate: PASS" in out


def test_stabilizers(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    code, out, _ = run_cli(["stabilizers", str(f)], capsys)
    assert code == 0
    assert "full torus" in out and "trivial" in out


def test_parse_error_exit_2(tmp_path, capsys):
    f = tmp_path / "bad.loop"
    f.write_text("[space]\ngenerator x weight=1,2 aux=1\n[group]\nrank 1\n")
    code, _, err = run_cli(["hh", str(f)], capsys)
    assert code == 2


def test_inhomogeneous_relation_rejected(tmp_path, capsys):
    f = tmp_path / "bad.loop"
    f.write_text(
        "[space]\ngenerator x weight=1 aux=1\ngenerator y weight=2 aux=1\n"
        "relation x + y\n[group]\nrank 1\n[assert]\nsmooth true\n"
    )
    code, _, err = run_cli(["hh", str(f)], capsys)
    assert code == 2


def test_backend_mismatch_exit_3(tmp_path, capsys):
    f = tmp_path / "zeta.loop"
    f.write_text(
        "[space]\ngenerator x weight=2 aux=1\n[group]\nrank 1\n"
        "[point]\nz zeta(3)\n[truncation]\naux_max 2\ntower_levels 2\n"
        "[assert]\nsmooth true\n"
    )
    # root-of-unity points route through the cyclotomic backend automatically,
    # so localize must succeed
    code, out, _ = run_cli(["localize", str(f)], capsys)
    assert code == 0, out


def test_window_too_small_inconclusive(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    # a 1-wide u-window leaves the sheared comparison with no usable bins
    code, out, _ = run_cli(["localize", str(f), "--u-window", "1"], capsys)
    assert code == 4
    assert "INCONCLUSIVE" in out


def test_cache_round_trip(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    cdir = tmp_path / "cache"
    code1, out1, err1 = run_cli(["hh", str(f), "--cache-dir", str(cdir)], capsys)
    code2, out2, err2 = run_cli(["hh", str(f), "--cache-dir", str(cdir)], capsys)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical
    assert "cache hit" in err2 and "cache hit" not in err1


def test_cache_ignores_comments_and_sees_truncation(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    g = tmp_path / "line2.loop"
    g.write_text("# a new comment\n" + LINE_GM)
    cdir = tmp_path / "cache"
    run_cli(["hh", str(f), "--cache-dir", str(cdir)], capsys)
    code, out, err = run_cli(["hh", str(g), "--cache-dir", str(cdir)], capsys)
    assert "cache hit" in err  # comments excluded from the hash
    code, out, err = run_cli(["hh", str(f), "--cache-dir", str(cdir), "--aux-max", "2"], capsys)
    assert "cache hit" not in err  # window change -> miss


def test_corrupt_cache_recomputed(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    cdir = tmp_path / "cache"
    run_cli(["hh", str(f), "--cache-dir", str(cdir)], capsys)
    for entry in os.listdir(cdir):
        p = cdir / entry
        p.write_bytes(b"loophh-cache:0:deadbeef\ngarbage")
    code, out, err = run_cli(["hh", str(f), "--cache-dir", str(cdir)], capsys)
    assert code == 0
    assert "corrupt cache" in err


def test_report_file_written(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    rpt = tmp_path / "out"
    rpt.mkdir()
    target = rpt / "report.txt"
    code, out, _ = run_cli(["hh", str(f), "--report", str(target)], capsys)
    assert target.read_text() == out


@pytest.mark.parametrize(
    "name",
    [
        "01_line_gm_z2.loop",
        "02_plane_12_zm1.loop",
        "03_plane_12_z3.loop",
        "04_line_gm_identity.loop",
        "05_plane_opposite_z3.loop",
        "06_weight2_zeta2.loop",
    ],
)
def test_shipped_instances_localize_pass(name, capsys):
    path = Path(__file__).resolve().parents[1] / "instances" / name
    code, out, _ = run_cli(["localize", str(path)], capsys)
    assert code == 0, out
    assert "verdict: PASS" in out


def test_reports_byte_deterministic(tmp_path, capsys):
    f = tmp_path / "line.loop"
    f.write_text(LINE_GM)
    _, out1, _ = run_cli(["localize", str(f)], capsys)
    _, out2, _ = run_cli(["localize", str(f)], capsys)
    assert out1 == out2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "loophh", "unipotent-check"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "unipotent-formal-tate: PASS" in proc.stdout
