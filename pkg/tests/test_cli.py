import json
import os

from carnot_acf.cli import main
from carnot_acf.counterexample import certificate_from_text
from carnot_acf.group import make_engel


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


class TestConstruct:
    def test_engel(self, tmp_path, capsys):
        code = run(tmp_path, "construct", "--group", "engel", "--b", "1", "--p", "0", "--q", "1/2")
        out = capsys.readouterr().out
        assert code == 0
        assert "1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y + x2" in out
        data = certificate_from_text(
            (tmp_path / "certificate.txt").read_text(), make_engel().weights
        )
        assert data["harmonic"] and data["inner_matches_pq"]

    def test_heisenberg_pq_one(self, tmp_path, capsys):
        code = run(tmp_path, "construct", "--group", "heisenberg:1",
                   "--b", "1", "--p", "1", "--q", "1")
        assert code == 0
        assert "harmonic: True" in capsys.readouterr().out

    def test_euclidean_fails_domain(self, tmp_path, capsys):
        code = run(tmp_path, "construct", "--group", "euclidean:3",
                   "--b", "1", "--p", "0", "--q", "1/2")
        assert code == 2

    def test_invalid_pq(self, tmp_path):
        assert run(tmp_path, "construct", "--group", "engel",
                   "--b", "1", "--p", "0", "--q", "0") == 2

    def test_bad_rational(self, tmp_path):
        assert run(tmp_path, "construct", "--group", "engel",
                   "--b", "1.5", "--p", "0", "--q", "1") == 1


class TestCheck:
    def test_harmonic_engel_u(self, tmp_path, capsys):
        code = run(tmp_path, "check", "--group", "engel",
                   "x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y")
        out = capsys.readouterr().out
        assert code == 0 and "harmonic: yes" in out

    def test_p5_report(self, tmp_path, capsys):
        code = run(tmp_path, "check", "--group", "engel",
                   "x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3")
        out = capsys.readouterr().out
        assert code == 0
        assert "harmonic: no" in out
        assert "intrinsic odd: yes" in out

    def test_syntax_error_exit_1(self, tmp_path):
        assert run(tmp_path, "check", "--group", "engel", "x1 +") == 1


class TestCurveCommands:
    def test_coeffs_and_files(self, tmp_path, capsys):
        code = run(tmp_path, "coeffs", "--group", "heisenberg:1",
                   "--b", "1", "--p", "0", "--q", "1/2",
                   "--samples", "20000", "--seed", "0")
        out = capsys.readouterr().out
        assert code == 0
        assert "a2 > 0" in out
        assert (tmp_path / "coeffs.csv").exists()
        assert (tmp_path / "coeffs.png").exists()

    def test_phi_csv_and_figure(self, tmp_path):
        code = run(tmp_path, "phi", "--group", "heisenberg:1",
                   "--b", "1", "--p", "0", "--q", "1/2",
                   "--samples", "4000", "--seed", "1", "--steps", "5", "--shells", "8")
        assert code == 0
        lines = (tmp_path / "phi.csv").read_text().splitlines()
        assert lines[0] == "r,phi,stderr,phi_quartic,quartic_stderr"
        assert len(lines) == 6
        assert (tmp_path / "phi.png").exists()

    def test_jay_with_no_plot(self, tmp_path):
        code = run(tmp_path, "jay", "--group", "heisenberg:1",
                   "--b", "1", "--p", "0", "--q", "1/2",
                   "--samples", "4000", "--seed", "2", "--steps", "4",
                   "--shells", "8", "--no-plot")
        assert code == 0
        assert (tmp_path / "jay.csv").exists()
        assert not (tmp_path / "jay.png").exists()

    def test_engel_unsupported_exit_3(self, tmp_path, capsys):
        code = run(tmp_path, "phi", "--group", "engel",
                   "--b", "1", "--p", "0", "--q", "1/2")
        assert code == 3
        assert "fundamental solution" in capsys.readouterr().err

    def test_polarized_transport(self, tmp_path):
        code = run(tmp_path, "coeffs", "--group", "heisenberg:1:polarized",
                   "--b", "1", "--p", "0", "--q", "1/2",
                   "--samples", "20000", "--seed", "3", "--no-plot")
        assert code == 0

    def test_explicit_u_string(self, tmp_path):
        code = run(tmp_path, "phi", "--group", "heisenberg:1",
                   "--u", "x2 + 1/4*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y",
                   "--samples", "4000", "--seed", "4", "--steps", "4",
                   "--shells", "8", "--no-plot")
        assert code == 0

    def test_u_not_decomposable_exit_2(self, tmp_path):
        code = run(tmp_path, "phi", "--group", "heisenberg:1", "--u", "x1^2",
                   "--samples", "1000", "--seed", "0", "--no-plot")
        assert code == 2

    def test_deterministic_csv_and_figure(self, tmp_path):
        args = ("jay", "--group", "heisenberg:1", "--b", "1", "--p", "0", "--q", "1/2",
                "--samples", "3000", "--seed", "7", "--steps", "3", "--shells", "6")
        a = tmp_path / "a"
        b = tmp_path / "b"
        a.mkdir()
        b.mkdir()
        assert run(a, *args) == 0
        assert run(b, *args) == 0
        assert (a / "jay.csv").read_bytes() == (b / "jay.csv").read_bytes()
        assert (a / "jay.png").read_bytes() == (b / "jay.png").read_bytes()


class TestEuclidOrtho:
    def test_orthogonal_pair(self, tmp_path, capsys):
        code = run(tmp_path, "euclid-ortho", "--n", "3", "x1", "x1^3 - 3*x1*x2^2",
                   "--samples", "50000", "--seed", "0")
        out = capsys.readouterr().out
        assert code == 0 and "PASS" in out

    def test_equal_degrees_rejected(self, tmp_path):
        assert run(tmp_path, "euclid-ortho", "--n", "3", "x1", "x2") == 2

    def test_non_harmonic_rejected(self, tmp_path):
        assert run(tmp_path, "euclid-ortho", "--n", "3", "x1", "x1^2") == 2


class TestDetCheck:
    def test_engel_like(self, tmp_path, capsys):
        code = run(tmp_path, "det-check", "--a12", "1", "--b", "1")
        out = capsys.readouterr().out
        assert code == 0
        assert "-72" in out and "PASS" in out

    def test_singular(self, tmp_path, capsys):
        code = run(tmp_path, "det-check", "--a12", "2/3", "--a21", "2/3", "--b", "1")
        assert code == 0
        assert "SINGULAR" in capsys.readouterr().out

    def test_usage_error_exit_1(self, tmp_path):
        assert run(tmp_path, "det-check", "--a12", "1") == 1  # --b missing


class TestGroupFileThroughCli:
    def test_custom_step2_file(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        path.write_text(json.dumps({
            "name": "custom",
            "step2_skew": [
                [["0", "-2", "0"], ["2", "0", "0"], ["0", "0", "0"]],
                [["0", "0", "1/2"], ["0", "0", "0"], ["-1/2", "0", "0"]],
            ],
        }))
        code = run(tmp_path, "construct", "--group", str(path),
                   "--b", "2", "--p", "1/3", "--q", "0")
        assert code == 0
        assert "harmonic: True" in capsys.readouterr().out
