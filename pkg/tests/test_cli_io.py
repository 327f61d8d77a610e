import json
import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacsdp.cli_io import (EXIT_CERTIFIED, EXIT_ERROR, EXIT_UNCERTIFIED, StateFileError, emit_state_text, main,
                           parse_state_file, parse_state_text, parse_symmetry)
from jacsdp.moment_sdp import import_text
from jacsdp.tensor_core import SymmetryClass

from conftest import DATA, example_entries

HEADER = "format: 1\ndims: [2,2]\n"


def test_example_files_hold_the_worked_states(example_name):
    sf = parse_state_file(DATA / f"{example_name}.txt")
    assert sf.normalize
    assert np.allclose(sf.tensor().entries, example_entries(example_name), atol=1e-15)


@pytest.mark.parametrize("text,line,match", [
    (HEADER + "1 1 1.0 0.0\n1 1 2.0 0.0\n", 4, "already given on line 3"),
    (HEADER + "1 3 1.0 0.0\n", 3, "out of range"),
    (HEADER + "1 1 1 1.0 0.0\n", 3, "3 indices"),
    (HEADER + "1 1 one 0.0\n", 3, "malformed"),
    (HEADER + "1 1 nan 0.0\n", 3, "finite"),
    (HEADER + "1 1\n", 3, "expected"),
    (HEADER + "1 1 1.0 0.0\nnormalize: true\n", 4, "precede"),
    ("format: 1\nformat: 1\n", 2, "duplicate"),
    ("format: 1\ncolour: red\n", 2, "unknown header"),
    ("format: 2\ndims: [2]\n1 1.0 0.0\n", 1, "unsupported format"),
    ("format: 1\ndims: 2x2\n", 2, "dims must look like"),
    ("format: 1\ndims: [2,0]\n", 2, "positive"),
    (HEADER + "normalize: maybe\n1 1 1.0 0.0\n", 3, "true or false"),
    (HEADER + "symmetry: partial:[1,5]\n1 1 1.0 0.0\n", 3, "outside"),
])
def test_errors_carry_line_numbers(text, line, match):
    with pytest.raises(StateFileError, match=match) as err:
        parse_state_text(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}: ")


@pytest.mark.parametrize("text,match", [
    ("dims: [2]\n1 1.0 0.0\n", "missing 'format"),
    ("format: 1\n1 1.0 0.0\n", "missing 'dims'"),
    (HEADER + "1 1 0.0 0.0\n", "all amplitudes are zero"),
])
def test_file_level_errors(text, match):
    with pytest.raises(StateFileError, match=match):
        parse_state_text(text)


def test_comments_defaults_and_symmetry_check():
    sf = parse_state_text("# a Bell pair\n" + HEADER + "\n1 1 1.0 0.0  # first\n2 2 1.0 0.0\n")
    assert sf.normalize and sf.symmetry == "auto"
    assert np.allclose(sf.tensor().entries, np.eye(2) / np.sqrt(2))
    bad = parse_state_text(HEADER + "symmetry: full\n1 2 1.0 0.0\n")
    with pytest.raises(StateFileError, match="declared symmetry"):
        bad.tensor()
    raw = parse_state_text(HEADER + "normalize: false\n1 1 3.0 4.0\n")
    assert raw.tensor().entries[0, 0] == 3 + 4j


def test_parse_symmetry():
    assert parse_symmetry("auto", 3) is None
    assert parse_symmetry("full", 3) == SymmetryClass.full(3)
    assert parse_symmetry("partial:[1,2]", 3) == SymmetryClass.partial((0, 1))
    with pytest.raises(StateFileError):
        parse_symmetry("partial:", 3)
    with pytest.raises(StateFileError):
        parse_symmetry("skew", 3)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3).flatmap(
    lambda dims: st.tuples(st.just(tuple(dims)), st.lists(st.tuples(finite, finite),
                                                         min_size=int(np.prod(dims)),
                                                         max_size=int(np.prod(dims))))),
       st.booleans())
def test_roundtrip_is_bit_exact(case, normalize):
    dims, vals = case
    amp = np.array([complex(r, i) for r, i in vals]).reshape(dims)
    if not np.any(amp):
        return
    sf = parse_state_text(emit_state_text(amp, normalize=normalize))
    assert sf.dims == dims and sf.normalize == normalize
    a, b = sf.amplitudes.view(np.float64), amp.view(np.float64)
    assert np.array_equal(a, b) and np.array_equal(np.signbit(a), np.signbit(b))


def _report(out: str) -> dict:
    return json.loads(out.split("--- json ---\n", 1)[1])


def test_cli_first_example_certifies(capsys, tmp_path):
    code = main(["run", "--input", str(DATA / "ex41.txt"), "--output", str(tmp_path / "r.txt")])
    out = capsys.readouterr().out
    assert code == EXIT_CERTIFIED
    assert re.search(r"^lambda: 0\.9317\d+$", out, re.M)
    assert "certificate: certified-global" in out
    d = _report(out)
    assert d["route"] == "partial" and d["symmetry"] == "partial:[1,2]"
    assert d["E_G"] == pytest.approx(np.sqrt(2 - 2 * d["G"]), abs=1e-11)
    assert (tmp_path / "r.txt").read_text() == out


def test_cli_oracle_only_exits_uncertified(capsys):
    code = main(["run", "--input", str(DATA / "ex42.txt"), "--oracle-only", "--seed", "7"])
    out = capsys.readouterr().out
    assert code == EXIT_UNCERTIFIED
    assert _report(out)["lambda"] >= 0.9660


def test_cli_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text(HEADER + "1 1 1.0\n")
    assert main(["run", "--input", str(bad)]) == EXIT_ERROR
    assert "line 3" in capsys.readouterr().err
    assert main(["run", "--input", str(tmp_path / "missing.txt")]) == EXIT_ERROR
    assert main(["run", "--input", str(DATA / "ex42.txt"), "--mode", "sym"]) == EXIT_ERROR
    # an order whose moment matrix exceeds the memory guard
    assert main(["run", "--input", str(DATA / "ex42.txt"), "--order", "9"]) == EXIT_ERROR
    assert "limit is 2000" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["run", "--input", "x", "--oracle-only", "--sdp-only"])


def test_cli_export_and_determinism(capsys, tmp_path):
    args = ["run", "--input", str(DATA / "ex44.txt"), "--seed", "3", "--export-sdp", str(tmp_path / "p.sdp")]
    assert main(args) == EXIT_CERTIFIED
    first = capsys.readouterr().out
    assert main(args) == EXIT_CERTIFIED
    second = capsys.readouterr().out
    strip = lambda s: [ln for ln in s.split("--- json ---")[0].splitlines() if not ln.startswith("time_")]
    assert strip(first) == strip(second)
    d1, d2 = _report(first), _report(second)
    d1.pop("time_seconds"), d2.pop("time_seconds")
    assert d1 == d2
    pr = import_text((tmp_path / "p.sdp").read_text())
    assert pr.size > 0 and pr.nvar > 0
    assert d1["separable"] is True and d1["route"] == "sym"
