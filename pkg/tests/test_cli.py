import pytest

from stlrank.cli import main


@pytest.fixture()
def dataset(tmp_path):
    path = tmp_path / "data.csv"
    code = main(
        [
            "generate",
            "-o",
            str(path),
            "--n",
            "200",
            "--mix",
            "cold=0.3,flat=0.5,spiky=0.2",
            "--seed",
            "17",
        ]
    )
    assert code == 0
    return path


def test_check_property(dataset, capsys):
    assert main(["check", "-i", str(dataset), "--property", "flat_start"]) == 0
    out = capsys.readouterr().out
    assert "satisfied 100/200" in out


def test_check_inline_formula(dataset, capsys):
    code = main(["check", "-i", str(dataset), "--formula", "G[0,3](d1(x) <= 0)"])
    assert code == 0
    assert "formula: G[0,3](d1(x) <= 0)" in capsys.readouterr().out


def test_check_each_lists_records(dataset, capsys):
    main(["check", "-i", str(dataset), "--property", "ditch", "--each"])
    lines = capsys.readouterr().out.splitlines()
    assert sum(1 for ln in lines if "\t" in ln) == 200


def test_check_rejects_bad_interval(dataset, capsys):
    code = main(["check", "-i", str(dataset), "--formula", "G[3,1](x < 0)"])
    assert code == 2
    assert "non-singular" in capsys.readouterr().err


def test_check_rejects_override_with_formula(dataset, capsys):
    code = main(
        ["check", "-i", str(dataset), "--formula", "G(x < 0)", "--w", "2"]
    )
    assert code == 2


def test_missing_input_is_io_error(tmp_path, capsys):
    code = main(["check", "-i", str(tmp_path / "nope.csv"), "--property", "ditch"])
    assert code == 1


def test_usage_error_exit_code(capsys):
    assert main(["check"]) == 2
    assert main(["unknown-subcommand"]) == 2


def test_rates_csv_and_plot_data(dataset, tmp_path, capsys):
    out = tmp_path / "rates.csv"
    dat = tmp_path / "rates.dat"
    code = main(
        ["rates", "-i", str(dataset), "-o", str(out), "--emit-plot-data", str(dat)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "category,property,satisfied,total,rate"
    assert any(ln.startswith("(all),flat_start,100,200,0.500000") for ln in lines)
    assert dat.read_text().startswith("# category ")


def test_rates_param_override(dataset, capsys):
    code = main(["rates", "-i", str(dataset), "--param", "w=5", "--d", "11"])
    assert code == 0
    code = main(["rates", "-i", str(dataset), "--param", "bogus=1"])
    assert code == 2


def test_metrics_table(dataset, capsys):
    assert main(["metrics", "-i", str(dataset)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["property", "group", "metric", "count", "mean"]


def test_generate_is_deterministic(tmp_path):
    args = ["generate", "--n", "100", "--mix", "flat=0.5,missing=0.5", "--seed", "3"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_labels_sidecar(tmp_path):
    out = tmp_path / "data.csv"
    code = main(
        ["generate", "-o", str(out), "--n", "50", "--mix", "flat=1.0", "--labels"]
    )
    assert code == 0
    sidecar = tmp_path / "data.labels.csv"
    lines = sidecar.read_text().splitlines()
    assert lines[0] == "product_id,planted_pattern"
    assert len(lines) == 51


def test_generate_invalid_mix(tmp_path, capsys):
    code = main(
        ["generate", "-o", str(tmp_path / "x.csv"), "--n", "10", "--mix", "flat=0.9"]
    )
    assert code == 2
    code = main(
        ["generate", "-o", str(tmp_path / "x.csv"), "--n", "10", "--mix", "flat"]
    )
    assert code == 2


def test_generate_jsonl_format(tmp_path):
    out = tmp_path / "data.jsonl"
    assert main(["generate", "-o", str(out), "--n", "20", "--mix", "flat=1.0"]) == 0
    assert out.read_text().splitlines()[0].startswith('{"product_id"')


def test_expand_report(capsys):
    code = main(["expand", "--property", "ditch", "--horizon", "13"])
    assert code == 0
    out = capsys.readouterr().out
    assert "grounded operator count: 39" in out
    assert "source operator count: 3" in out


def test_expand_query_string(capsys):
    code = main(["expand", "--property", "ditch", "--horizon", "1", "--w", "1", "--query"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.strip() == "df[((df.pos_0 > 10) & ((df.pos_0 < -10) | (df.pos_1 < -10)))]"
    assert main(["expand", "--property", "flat_start", "--horizon", "5", "--query"]) == 2


def test_expand_formula_to_file(tmp_path, capsys):
    out = tmp_path / "expansion.txt"
    code = main(
        ["expand", "--formula", "G[0,2](x <= 0)", "--horizon", "13", "-o", str(out)]
    )
    assert code == 0
    assert out.read_text().strip() == "(x[0] <= 0) & (x[1] <= 0) & (x[2] <= 0)"


def test_kmeans_summary(tmp_path, capsys):
    data = tmp_path / "data.csv"
    main(
        [
            "generate", "-o", str(data), "--n", "300",
            "--mix", "spiky=0.6,flat=0.4", "--seed", "11",
        ]
    )
    cent = tmp_path / "centroids.csv"
    code = main(["kmeans", "-i", str(data), "--k", "4", "--seed", "5", "-o", str(cent)])
    assert code == 0
    out = capsys.readouterr().out
    assert "centroids satisfying ditch or spike:" in out
    lines = cent.read_text().splitlines()
    assert lines[0].startswith("centroid,pos_0,")
    assert len(lines) == 5
