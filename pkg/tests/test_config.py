from fractions import Fraction

import pytest

from liftmin.config import ConfigError, RunConfig, load_config, parse_config


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert (cfg.genus, cfg.metric, cfg.length_cutoff_max, cfg.word_cutoff_max) == (2, "regular-polygon", 12.0, 24)


def test_comments_and_blank_lines():
    cfg = parse_config("# a run\n\ngenus = 3   # trailing\ncurve = \"a1 a2 A1 A2\"\n")
    assert cfg.genus == 3
    assert cfg.curve == "a1 a2 A1 A2"


def test_values_are_typed():
    cfg = parse_config("period = 1/3\nshift = 2\nhomology = 1, 0, 0, 0\nlength_cutoff = 6.5\n")
    assert cfg.period == Fraction(1, 3)
    assert cfg.shift == 2
    assert cfg.homology == (1, 0, 0, 0)
    assert cfg.length_cutoff == 6.5


def test_genus_one_is_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("genus = 1\n")
    assert err.value.line == 1
    assert err.value.kind == "config"


@pytest.mark.parametrize("text,line,column", [
    ("genus = 2\nfoo = 1\n", 2, 1),
    ("genus = 2\n  genus = 3\n", 2, 3),
    ("genus = two\n", 1, 9),
    ("genus = 2\nlength_cutoff_max = -1\n", 2, 21),
    ("just words\n", 1, 1),
    ("period = 1/0\n", 1, 10),
])
def test_errors_carry_positions(text, line, column):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert (err.value.line, err.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(err.value)


def test_missing_matrix_file_is_io_error(tmp_path):
    missing = tmp_path / "nope.txt"
    with pytest.raises(ConfigError) as err:
        parse_config(f"matrix_file = {missing}\n")
    assert err.value.kind == "io"
    assert str(missing) in str(err.value)


def test_unknown_metric():
    with pytest.raises(ConfigError, match="unknown metric"):
        parse_config("metric = flat\n")


def test_overrides_win(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("genus = 3\ncurve = a1\n")
    cfg = load_config(path, {"curve": "a2", "genus": None})
    assert (cfg.genus, cfg.curve) == (3, "a2")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(tmp_path / "absent.cfg")
    assert err.value.kind == "io"


def test_echo_is_json_friendly():
    echo = parse_config("period = 2/3\nhomology = 1 0 0 0\n").echo()
    assert echo["period"] == "2/3"
    assert echo["homology"] == [1, 0, 0, 0]
