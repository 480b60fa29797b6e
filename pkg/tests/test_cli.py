import subprocess
import sys

import pytest

from cssr.cli import build_parser, run
from cssr.machine import deserialize


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_infer_eval(tmp_path, capsys):
    data, model, dot = tmp_path / "s.txt", tmp_path / "m.json", tmp_path / "m.dot"
    assert call(capsys, "generate", "--spec", "even", "--n", "10000", "--seed", "1", "--out", str(data))[0] == 0
    code, _, _ = call(
        capsys, "infer", "--data", str(data), "--alphabet", "AB", "--lmax", "4", "--alpha", "0.001",
        "--out", str(model), "--dot", str(dot),
    )
    assert code == 0
    assert deserialize(model.read_text()).n_states == 2
    assert dot.read_text().count("->") == 3
    code, out, _ = call(capsys, "eval", "--spec", "even", "--machine", str(model), "--word-length", "10")
    assert code == 0
    fields = dict(line.split("=") for line in out.split())
    assert fields["n_states"] == "2"
    assert float(fields["tv_error"]) < 0.06


def test_outputs_byte_identical(tmp_path, capsys):
    for tag in "ab":
        call(capsys, "generate", "--spec", "seven-default", "--n", "5000", "--seed", "3", "--out", str(tmp_path / f"{tag}.txt"))
        call(capsys, "infer", "--data", str(tmp_path / f"{tag}.txt"), "--lmax", "3", "--out", str(tmp_path / f"{tag}.json"))
        call(
            capsys, "sweep", "--spec", "even", "--n", "300,1000", "--lmax", "2,3", "--trials", "2",
            "--no-timing", "--summary", "--out", str(tmp_path / f"{tag}.csv"),
        )
    for ext in ("txt", "json", "csv"):
        assert (tmp_path / f"a.{ext}").read_bytes() == (tmp_path / f"b.{ext}").read_bytes()


def test_sweep_jobs_identical(tmp_path, capsys):
    args = ["sweep", "--spec", "even", "--n", "1e3", "--lmax", "3", "--trials", "4", "--no-timing"]
    _, one, _ = call(capsys, *args, "--jobs", "1")
    _, many, _ = call(capsys, *args, "--jobs", "2")
    assert one == many and one.startswith("n,lmax,alpha,trial,seed")


def test_suggest_lmax(capsys):
    assert call(capsys, "suggest-lmax", "--n", "10000", "--k", "2") == (0, "12\n", "")
    assert call(capsys, "suggest-lmax", "--n", "10000", "--k", "2", "--entropy", "0.6667")[1] == "17\n"


def test_unknown_symbol_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("ABC")
    code, _, err = call(capsys, "infer", "--data", str(path), "--alphabet", "AB", "--lmax", "2")
    assert code == 2
    assert err.count("\n") == 1 and "UnknownSymbol" in err and "position 2" in err


def test_inference_failure_exit_3(tmp_path, capsys):
    path = tmp_path / "short.txt"
    path.write_text("AB")
    code, _, err = call(capsys, "infer", "--data", str(path), "--alphabet", "AB", "--lmax", "4")
    assert code == 3 and err.startswith("cssr: error: InsufficientData:")


def test_missing_file_exit_2(tmp_path, capsys):
    code, _, err = call(capsys, "eval", "--spec", "even", "--machine", str(tmp_path / "none.json"))
    assert code == 2 and err.count("\n") == 1


def test_bad_machine_exit_2(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    assert call(capsys, "eval", "--spec", "even", "--machine", str(path))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [["infer", "--bogus"], ["frobnicate"], [], ["suggest-lmax", "--n", "ten", "--k", "2"], ["infer", "--data", "x", "--lmax", "2", "--test", "t"]],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1 and err.count("\n") == 1 and "UsageError" in err


def test_help_documents_every_flag(capsys):
    parser = build_parser()
    subparsers = next(a for a in parser._actions if a.dest == "command").choices
    for name, sub in subparsers.items():
        code, out, _ = call(capsys, name, "--help")
        assert code == 0
        for action in sub._actions:
            for flag in action.option_strings:
                assert flag in out
            assert action.help


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cssr", "suggest-lmax", "--n", "100", "--k", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "6\n"
