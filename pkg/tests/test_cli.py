import numpy as np
import pytest

from krv.cli import build_parser, main


@pytest.fixture
def blob(tmp_path):
    rng = np.random.default_rng(0)
    rows = ["x1,x2,colour,label"]
    for i in range(40):
        c = i % 2
        x = rng.normal(size=2) + 2.5 * c
        rows.append(f"{x[0]:.5f},{x[1]:.5f},{'red' if i % 3 else 'blue'},{'yes' if c else 'no'}")
    path = tmp_path / "blob.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


def test_train_and_predict(blob, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", str(blob), "--width", "0.6", "--k", "3", "-o", str(model)]) == 0
    out = capsys.readouterr().out
    assert "relevance vectors" in out and model.exists()
    assert main(["predict", str(model), str(blob)]) == 0
    captured = capsys.readouterr()
    preds = captured.out.split()
    assert len(preds) == 40 and set(preds) <= {"yes", "no"}
    assert "accuracy" in captured.err
    # rows without the label column
    unlabeled = tmp_path / "q.csv"
    unlabeled.write_text("0.0,0.0,red\n3.0,3.0,blue\n")
    assert main(["predict", str(model), str(unlabeled)]) == 0
    assert capsys.readouterr().out.split() == ["no", "yes"]


@pytest.mark.parametrize("learner", ["rvm_bern", "rvm_gauss"])
def test_train_rvm(blob, tmp_path, learner, capsys):
    model = tmp_path / "r.json"
    args = ["train", str(blob), "--learner", learner, "--kernel", "polynomial", "--scaling", "standard", "-o", str(model)]
    assert main(args) == 0
    assert main(["predict", str(model), str(blob)]) == 0


def test_bench_run_and_stats(blob, tmp_path, capsys):
    other = tmp_path / "other.csv"
    other.write_text(blob.read_text().replace("blue", "red"))
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(f'datasets = ["{blob.name}", "{other.name}"]\nruns = 1\nfolds = 3\n')
    out = tmp_path / "res"
    argv = ["bench", "run", str(cfg), "--k-grid", "1:3", "--width-grid", "0.5,1.0", "--delta-grid", "0.1,10",
            "--output-dir", str(out)]
    assert main(argv) == 0
    printed = capsys.readouterr().out
    assert "grid cells evaluated" in printed
    for name in ("report.json", "accuracy.csv", "accuracy.txt", "sparsity.csv", "ttest.csv", "ranks.csv",
                 "timings.csv", "nemenyi.svg"):
        assert (out / name).exists(), name
    before = (out / "ranks.csv").read_bytes()
    assert main(["bench", "stats", str(out)]) == 0
    assert (out / "ranks.csv").read_bytes() == before


def test_parser_number_lists():
    args = build_parser().parse_args(["bench", "run", "c.toml", "--k-grid", "1:4,9", "--delta-grid", "1e-6,10"])
    assert args.k_grid == (1, 2, 3, 4, 9)
    assert args.delta_grid == (1e-6, 10.0)


@pytest.mark.parametrize(
    "argv",
    [
        ["predict", "missing.json", "missing.csv"],
        ["train", "missing.csv"],
        ["bench", "run", "missing.toml"],
        ["bench", "stats", "missing-dir"],
    ],
)
def test_errors_exit_nonzero(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_bench_no_loadable_dataset(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('datasets = ["nope.csv"]\nlearners = ["knn"]\n')
    assert main(["bench", "run", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1
    assert "no dataset" in capsys.readouterr().err


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "krv", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("krv ")
