import numpy as np
import pytest

from smolpod import ValidationError
from smolpod.podio import (
    MAGIC,
    dump_config,
    load_config,
    parse_config_text,
    read_matrix,
    read_vector,
    write_matrix,
    write_vector,
)


def test_matrix_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((7, 3))
    A[0, 0] = -0.0  # sign of zero must survive
    path = tmp_path / "a.podmat"
    write_matrix(path, A)
    B = read_matrix(path)
    assert A.shape == B.shape
    assert np.array_equal(A.view(np.uint64), B.view(np.uint64))


def test_file_layout(tmp_path):
    path = tmp_path / "m.podmat"
    write_matrix(path, np.array([[1.0, 2.0], [3.0, 4.0]]))
    blob = path.read_bytes()
    assert blob[:8] == MAGIC
    assert int.from_bytes(blob[8:16], "little") == 2
    assert int.from_bytes(blob[16:24], "little") == 2
    assert np.frombuffer(blob[24:], dtype="<f8").tolist() == [1.0, 2.0, 3.0, 4.0]


def test_vector_roundtrip(tmp_path):
    v = np.linspace(0, 1, 9)
    path = tmp_path / "v.podmat"
    write_vector(path, v)
    assert np.array_equal(read_vector(path), v)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.podmat"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(ValidationError):
        read_matrix(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "trunc.podmat"
    write_matrix(path, np.ones((4, 4)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValidationError):
        read_matrix(path)


def test_parse_config_text():
    text = """
    # comment
    system.N = 128
    kernel.a=0.7   # trailing comment
    greedy.eps = 1e-13
    """
    values = parse_config_text(text)
    assert values["system.N"] == "128"
    assert values["kernel.a"] == "0.7"
    assert values["greedy.eps"] == "1e-13"


def test_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_config_text("not a key value line")


def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("system.N=64\nkernel.a=0.6\n")
    values = load_config(path, overrides=["kernel.a=0.8", "integrator.t_end=4"])
    assert values["kernel.a"] == "0.8"
    assert values["integrator.t_end"] == "4"
    with pytest.raises(ValidationError):
        load_config(path, overrides=["no-equals-sign"])


def test_dump_config_is_sorted_and_parseable():
    values = {"b.key": "2", "a.key": "1"}
    text = dump_config(values)
    assert text.splitlines()[0].startswith("a.key=")
    assert parse_config_text(text) == values
