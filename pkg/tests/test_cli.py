import pytest

from dilutedmp.cli import main


def test_sweep_stdout(capsys):
    assert main(["sweep", "--d", "3", "--p", "0.05,0.1", "--trials", "50", "--noise", "x"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("d,p,noise,pattern,eps") and len(out) == 3
    assert out[1].startswith("3,0.05,x,CH,0.15,50,")


def test_sweep_file_matches_stdout(tmp_path, capsys):
    args = ["sweep", "--d", "3", "--p", "0.1", "--trials", "40", "--seed", "5"]
    main(args)
    text = capsys.readouterr().out
    path = tmp_path / "rows.csv"
    assert main(args + ["--out", str(path)]) == 0
    assert path.read_text() == text


def test_decode_from_file(tmp_path, capsys):
    # one X on the corner qubit flips the first Z check only
    bits = [0] * 12
    bits[0] = 1
    path = tmp_path / "syn.txt"
    path.write_text(" ".join(map(str, bits)))
    assert main(["decode", "--d", "3", "--p", "0.05", "--noise", "x", "--syndrome", str(path)]) == 0
    out = dict(line.split(": ", 1) for line in capsys.readouterr().out.splitlines())
    assert out["converged"] == "true" and out["estimate"].count("X") == 1


def test_decode_bad_length(tmp_path, capsys):
    path = tmp_path / "syn.txt"
    path.write_text("0 1 0")
    assert main(["decode", "--d", "3", "--p", "0.05", "--syndrome", str(path)]) == 2
    assert "dilutedmp decode" in capsys.readouterr().err


def test_radius(capsys):
    assert main(["radius", "--d", "5", "--pattern", "ch", "--s", "1"]) == 0
    out = capsys.readouterr().out
    assert "computed_radius: 2" in out


def test_cavity(capsys):
    assert main(["cavity", "--p", "0.1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(line.startswith("sigma=") for line in lines)
    assert main(["cavity", "--prior", "0.7,0.1,0.1"]) == 2


def test_strip(capsys):
    assert main(["strip", "--k", "0,1", "--nB", "1", "--samples", "30"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3
    assert main(["strip", "--k", "0", "--nB", "1", "--weights", "1-1"]) == 2


def test_graph(capsys):
    assert main(["graph", "--d", "3", "--pattern", "dv", "--format", "dot"]) == 0
    assert capsys.readouterr().out.startswith("graph")


@pytest.mark.parametrize("argv", [
    [],
    ["sweep", "--d", "3"],
    ["sweep", "--d", "x", "--p", "0.1"],
    ["radius", "--d", "5", "--pattern", "zz", "--s", "1"],
    ["graph", "--d", "3", "--pattern", "dv", "--format", "png"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
