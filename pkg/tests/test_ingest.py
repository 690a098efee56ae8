import json

import numpy as np
import pytest

from stlrank import (
    Dataset,
    DatasetError,
    GeneratorConfig,
    ProductRecord,
    SchemaError,
    build,
    derivative_values,
    eval_fast,
    filter_complete,
    generate,
    load_dataset,
    to_traceset,
    write_csv,
    write_jsonl,
)
from stlrank.ingest import labels_path_for, write_labels

MIX = {"cold": 0.3, "flat": 0.5, "spiky": 0.2}


def record(positions, pid="p1", category="c0", impressions=10, clicks=1, purchases=0):
    return ProductRecord(pid, category, tuple(positions), impressions, clicks, purchases)


def test_record_validation():
    record([1.0] * 14)
    record([-1.0] * 14)
    with pytest.raises(SchemaError):
        record([0.5] + [1.0] * 13)
    with pytest.raises(SchemaError):
        record([-2.0] + [1.0] * 13)
    with pytest.raises(SchemaError):
        record([1.0] * 14, impressions=-1)
    with pytest.raises(SchemaError):
        record([1.0] * 14, clicks=1.5)
    with pytest.raises(SchemaError):
        record([1.0] * 14, pid="")


def test_dataset_rejects_duplicate_ids():
    with pytest.raises(SchemaError):
        Dataset([record([1.0] * 14), record([2.0] * 14)])


def test_derivative_flags_sentinel_neighbors():
    d, flagged = derivative_values([5.0, 7.0, -1.0, 4.0, 4.0])
    assert list(d) == [2.0, 0.0, 0.0, 0.0]
    assert list(flagged) == [False, True, True, False]


def test_to_traceset_grids():
    w = to_traceset(record(range(1, 15)))
    assert len(w["x"]) == 14
    assert len(w["d1(x)"]) == 13
    assert list(w["x"].times[:3]) == [0, 1, 2]
    assert list(w["d1(x)"].values) == [1.0] * 13


def test_filter_complete_drops_missing_rows():
    ds = Dataset(
        [
            record([5.0] * 14, pid="a"),
            record([5.0] * 6 + [-1.0] + [5.0] * 7, pid="b"),
        ],
        planted={"a": "flat", "b": "missing"},
    )
    kept = filter_complete(ds)
    assert [r.product_id for r in kept.records] == ["a"]
    assert kept.planted == {"a": "flat"}


def test_csv_roundtrip_is_byte_identical(tmp_path):
    ds = generate(GeneratorConfig(n_records=120, pattern_mix=MIX, seed=5))
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_csv(ds, str(p1))
    loaded = load_dataset(str(p1))
    write_csv(loaded, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_jsonl_roundtrip_is_byte_identical(tmp_path):
    ds = generate(
        GeneratorConfig(n_records=80, pattern_mix={"missing": 0.5, "random": 0.5}, seed=6)
    )
    p1 = tmp_path / "a.jsonl"
    p2 = tmp_path / "b.jsonl"
    write_jsonl(ds, str(p1))
    loaded = load_dataset(str(p1))
    write_jsonl(loaded, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    first = json.loads(p1.read_text().splitlines()[0])
    assert len(first["positions"]) == 14


def test_csv_schema_errors_name_row_and_column(tmp_path):
    header = (
        "product_id,category,"
        + ",".join(f"pos_{i}" for i in range(14))
        + ",impressions,clicks,purchases"
    )
    good = "p1,c0," + ",".join(["5"] * 14) + ",10,1,0"
    bad_pos = "p2,c0," + ",".join(["5"] * 13 + ["zero"]) + ",10,1,0"
    path = tmp_path / "data.csv"
    path.write_text(header + "\n" + good + "\n" + bad_pos + "\n")
    with pytest.raises(SchemaError) as err:
        load_dataset(str(path))
    assert "row 3" in str(err.value)
    assert "pos_13" in str(err.value)

    path.write_text("wrong,header\n")
    with pytest.raises(SchemaError):
        load_dataset(str(path))

    path.write_text(header + "\np1,c0,5,5\n")
    with pytest.raises(SchemaError) as err:
        load_dataset(str(path))
    assert "row 2" in str(err.value)


def test_jsonl_schema_errors(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text('{"product_id": "p1"}\n')
    with pytest.raises(SchemaError) as err:
        load_dataset(str(path))
    assert "missing keys" in str(err.value)
    path.write_text("not json\n")
    with pytest.raises(SchemaError):
        load_dataset(str(path))


def test_generator_is_deterministic():
    a = generate(GeneratorConfig(n_records=200, pattern_mix=MIX, seed=9))
    b = generate(GeneratorConfig(n_records=200, pattern_mix=MIX, seed=9))
    assert a.records == b.records
    assert a.planted == b.planted
    c = generate(GeneratorConfig(n_records=200, pattern_mix=MIX, seed=10))
    assert a.records != c.records


def test_generator_counts_are_exact_per_category():
    ds = generate(GeneratorConfig(n_records=1000, pattern_mix=MIX, seed=1))
    per_cat = ds.by_category()
    assert len(per_cat) == 10
    for cat, recs in per_cat.items():
        counts = {}
        for rec in recs:
            counts[ds.planted[rec.product_id]] = counts.get(ds.planted[rec.product_id], 0) + 1
        assert counts == {"cold": 30, "flat": 50, "spiky": 20}


def test_generator_config_validation():
    with pytest.raises(DatasetError):
        GeneratorConfig(n_records=0, pattern_mix=MIX)
    with pytest.raises(DatasetError):
        GeneratorConfig(n_records=10, pattern_mix={"flat": 0.5})
    with pytest.raises(DatasetError):
        GeneratorConfig(n_records=10, pattern_mix={"blob": 1.0})
    with pytest.raises(DatasetError):
        GeneratorConfig(n_records=10, pattern_mix=MIX, noise_sigma=-1.0)


def planted_sat(ds, name):
    spec = build(name)
    out = {}
    for rec in ds.records:
        pattern = ds.planted[rec.product_id]
        verdict = eval_fast(spec.formula, to_traceset(rec)).satisfied
        out.setdefault(pattern, []).append(verdict)
    return out


def test_planted_patterns_satisfy_their_properties():
    mix = {name: 1.0 / 6.0 for name in ("flat", "cold", "warm", "spiky", "missing", "random")}
    ds = generate(GeneratorConfig(n_records=600, pattern_mix=mix, seed=3))

    flat = planted_sat(ds, "flat_start")
    assert all(flat["flat"]) and not any(flat["cold"]) and not any(flat["spiky"])
    cold = planted_sat(ds, "cold_start")
    assert all(cold["cold"]) and not any(cold["flat"]) and not any(cold["warm"])
    warm = planted_sat(ds, "warm_start")
    assert all(warm["warm"]) and not any(warm["cold"])
    steady = planted_sat(ds, "steady_state")
    assert all(steady["flat"]) and not any(steady["spiky"])
    miss = planted_sat(ds, "no_long_miss")
    assert not any(miss["missing"]) and all(miss["flat"])

    ditch = planted_sat(ds, "ditch")
    spike = planted_sat(ds, "spike")
    for has_d, has_s in zip(ditch["spiky"], spike["spiky"]):
        assert has_d != has_s  # exactly one of the two
    assert not any(ditch["flat"]) and not any(spike["flat"])


def test_all_flat_mix_satisfies_flat_and_steady():
    ds = generate(GeneratorConfig(n_records=100, pattern_mix={"flat": 1.0}, seed=4))
    flat = planted_sat(ds, "flat_start")
    steady = planted_sat(ds, "steady_state")
    assert all(flat["flat"]) and all(steady["flat"])


def test_noise_keeps_positions_valid():
    ds = generate(
        GeneratorConfig(n_records=150, pattern_mix=MIX, seed=8, noise_sigma=2.0)
    )
    for rec in ds.records:
        for p in rec.positions:
            assert p == -1.0 or p >= 1.0


def test_labels_sidecar(tmp_path):
    ds = generate(GeneratorConfig(n_records=30, pattern_mix=MIX, seed=2))
    path = tmp_path / "data.csv"
    write_csv(ds, str(path))
    sidecar = labels_path_for(str(path))
    write_labels(ds, sidecar)
    lines = open(sidecar).read().splitlines()
    assert lines[0] == "product_id,planted_pattern"
    assert len(lines) == 31
    assert lines[1].startswith("p000000,")


def test_days_override(tmp_path):
    header = "product_id,category,pos_0,pos_1,impressions,clicks,purchases\n"
    (tmp_path / "short.csv").write_text(header + "p1,c0,5,6,1,1,1\n")
    ds = load_dataset(str(tmp_path / "short.csv"), days=2)
    assert len(ds.records[0].positions) == 2
    with pytest.raises(SchemaError):
        load_dataset(str(tmp_path / "short.csv"))  # default expects 14
