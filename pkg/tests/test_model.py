from pathlib import Path

import pytest

from bnnbdd import oracle
from bnnbdd.model import (
    InputSample,
    ModelError,
    generate_random,
    load_input,
    load_model,
    model_to_dict,
    parse_arch,
    save_model,
)

from conftest import all_points

DATA = Path(__file__).parent / "data"
GOOD_FIXTURES = ["tiny_2_2_2.json", "degenerate_3_2_2.json"]


def test_load_minimal():
    m = load_model(DATA / "tiny_2_2_2.json")
    assert m.depth == 1
    assert m.num_classes == 2
    assert m.widths == [2, 2]
    assert m.arch == "2:2:2"


def test_bad_weight_names_locus():
    with pytest.raises(ModelError, match=r"block 0, row 1, column 0"):
        load_model(DATA / "bad_weight.json")


def test_bad_bias_length():
    with pytest.raises(ModelError, match="bias has length 1"):
        load_model(DATA / "bad_bias_length.json")


def test_bad_sigma():
    with pytest.raises(ModelError, match=r"bn_sigma\[0\]"):
        load_model(DATA / "bad_sigma.json")


def test_parse_error_reports_line():
    with pytest.raises(ModelError, match="line 3"):
        load_model(DATA / "broken.json")


def test_width_mismatch(tmp_path):
    doc = model_to_dict(generate_random("3:2:2", 0))
    doc["blocks"][1]["weights"] = [[1, 1, 1], [1, -1, 1]]
    p = tmp_path / "m.json"
    import json
    p.write_text(json.dumps(doc))
    with pytest.raises(ModelError, match="does not match"):
        load_model(p)


@pytest.mark.parametrize("name", GOOD_FIXTURES)
def test_round_trip(name, tmp_path):
    m = load_model(DATA / name)
    save_model(m, tmp_path / "out.json")
    assert load_model(tmp_path / "out.json") == m


def test_generate_deterministic():
    assert generate_random("4:3:2", 7) == generate_random("4:3:2", 7)
    assert generate_random("4:3:2", 7) != generate_random("4:3:2", 8)


def test_generate_p1_shape():
    m = generate_random("9:20:10", 1)
    assert (m.depth, m.input_width, m.blocks[0].output_width, m.num_classes) == (1, 9, 20, 10)


@pytest.mark.parametrize("arch", ["4:3:2", "6:5:4:3", "8:8:4"])
def test_generate_round_trip(arch, tmp_path):
    m = generate_random(arch, 3)
    save_model(m, tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == m


def test_generate_ranges():
    m = generate_random("30:40:40:5", 2)
    for blk in m.blocks:
        assert all(-2 <= x <= 2 for x in blk.bias + blk.bn_gamma + blk.bn_mu + blk.bn_alpha)
        assert all(0.5 <= s <= 2 for s in blk.bn_sigma)
    alphas = [a for blk in m.blocks for a in blk.bn_alpha]
    assert 0.0 in alphas


@pytest.mark.parametrize("arch", ["bogus", "4:3", "4:0:2", "4:3:1"])
def test_bad_arch(arch):
    with pytest.raises(ModelError):
        parse_arch(arch)


def test_oracle_total_on_generated():
    for seed in range(5):
        m = generate_random("10:6:6:3", seed)
        for x in all_points(10):
            assert 0 <= oracle.evaluate(m, x) < 3


def test_load_input(tmp_path):
    assert load_input(DATA / "u4.txt", 4).bits == (0, 1, 0, 1)
    p = tmp_path / "short.txt"
    p.write_text("01")
    with pytest.raises(ModelError, match="length 2"):
        load_input(p, 4)
    p.write_text("012")
    with pytest.raises(ModelError, match="position 3"):
        load_input(p, 4)
    assert InputSample.from_string("0 1\n1 0").bits == (0, 1, 1, 0)
