import json
import math

import numpy as np
import pytest

from stclab.algebra import (
    CodeSpec,
    DimensionMismatchError,
    NotApplicableError,
    SpecParseError,
    covariance_closed_form_2x2,
    cyclic_gamma_blocks,
    cyclic_spec,
    encode,
    generator_matrix,
    golden_code,
    load_spec,
    perfect_code_4x4,
    rho_scalar,
    save_spec,
    spec_from_source,
    stack_symbols,
)
from stclab.channel import equivalent_channels, sample_channel
from stclab.linalg import hermitian_gram, vectorize


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def expected_degree4_blocks(g):
    """The degree-4 placement blocks, frozen entry by entry."""
    b1 = [[1, 0, 0, 0], [0, 0, 0, g], [0, 0, g, 0], [0, g, 0, 0]]
    b2 = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, g], [0, 0, g, 0]]
    b3 = [[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, g]]
    b4 = [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    return np.array(b1 + b2 + b3 + b4, dtype=np.complex128)


def test_degree4_blocks_exact():
    for g in (1j, 0.5 + 0.5j * math.sqrt(3.0)):
        blocks = cyclic_gamma_blocks(4, g)
        expected = expected_degree4_blocks(g)
        assert len(blocks) == 4
        for b in blocks:
            assert np.array_equal(b, expected)


def test_cyclic_blocks_all_equal_and_one_nonzero_per_row():
    for n in (2, 3, 4, 5):
        blocks = cyclic_gamma_blocks(n, 1j)
        assert all(np.array_equal(b, blocks[0]) for b in blocks)
        assert np.all(np.count_nonzero(blocks[0], axis=1) == 1)


def test_cyclic_blocks_gamma_one_is_permutation():
    blk = cyclic_gamma_blocks(2, 1.0)[0]
    assert set(np.unique(blk)) == {0.0, 1.0}


def test_rho_scalar_trivial_and_golden():
    spec = cyclic_spec(2, 1j, np.array([[1.0, 2.0], [1.0, -2.0]]))
    assert np.array_equal(rho_scalar(spec, 0), np.eye(2))
    golden = golden_code()
    w = (1 + math.sqrt(5)) / 2
    w_conj = (1 - math.sqrt(5)) / 2
    alpha = (1 + 1j) - 1j * w
    alpha_conj = (1 + 1j) - 1j * w_conj
    expected = np.diag([alpha * w, alpha_conj * w_conj])
    assert np.allclose(rho_scalar(golden, 1), expected, atol=1e-12)
    with pytest.raises(IndexError):
        rho_scalar(golden, 2)


def test_rho_scalar_perfect4_first_basis_element():
    # sigma^j of (1-3i) + i t^2, t = 2 cos(2 pi/15), recomputed independently.
    spec = perfect_code_4x4()
    diag = np.diag(rho_scalar(spec, 0))
    for j in range(4):
        t = 2.0 * math.cos(2.0 * math.pi * (2**j) / 15.0)
        assert diag[j] == pytest.approx((1 - 3j) + 1j * t * t, abs=1e-12)


def test_encode_zero_block(golden, perfect4):
    for spec in (golden, perfect4):
        assert np.array_equal(encode(spec, np.zeros((spec.n, spec.n))), np.zeros((spec.n, spec.n)))


def test_encode_single_symbol_is_first_conjugate_diagonal(golden, perfect4):
    # One nonzero symbol x_{11}=1: hand evaluation of the double sum leaves
    # exactly the diagonal of first-basis conjugates.
    for spec in (golden, perfect4):
        s = np.zeros((spec.n, spec.n), dtype=complex)
        s[0, 0] = 1.0
        assert np.allclose(encode(spec, s), np.diag(spec.omega_table[:, 0]), atol=1e-12)


def test_encode_rejects_bad_shape(golden):
    with pytest.raises(DimensionMismatchError):
        encode(golden, np.zeros((3, 3)))


def test_generator_identity(golden, perfect4, qam4):
    rng = np.random.default_rng(10)
    for spec in (golden, perfect4):
        g = generator_matrix(spec)
        for _ in range(200):
            s = rng.choice(qam4.points, size=(spec.n, spec.n))
            lhs = vectorize(encode(spec, s))
            assert np.linalg.norm(lhs - g @ stack_symbols(s)) <= 1e-10


def test_generator_first_column_matches_unit_encode(golden):
    g = generator_matrix(golden)
    s = np.zeros((2, 2), dtype=complex)
    s[0, 0] = 1.0
    assert np.allclose(g[:, 0], vectorize(encode(golden, s)), atol=1e-12)


def test_generator_all_ones_gamma_one_is_permutation_structured():
    spec = cyclic_spec(2, 1.0, np.array([[1.0, 1.0], [1.0, -1.0]]))
    # With a 0/1 block structure every generator row has one entry per block
    g = generator_matrix(spec)
    assert np.all(np.count_nonzero(g, axis=1) == 2)  # one nonzero per basis block


def test_generator_invertible(perfect4):
    assert abs(np.linalg.det(generator_matrix(perfect4))) > 1e-6


def test_closed_form_identity_channel_unit_alpha():
    spec = golden_code(alpha_coeffs=(1.0, 0.0))
    a, a_omega, b = covariance_closed_form_2x2(spec, np.eye(2))
    assert a == pytest.approx(2.0)
    assert b == pytest.approx(0.0)
    w = (1 + math.sqrt(5)) / 2
    w_conj = (1 - math.sqrt(5)) / 2
    assert a_omega == pytest.approx(w * w + w_conj * w_conj)


def test_closed_forms_match_grams(golden):
    rng = np.random.default_rng(11)
    nm = (golden.omega_table[0, 1] / golden.omega_table[0, 0]).real * (
        golden.omega_table[1, 1] / golden.omega_table[1, 0]
    ).real
    for _ in range(100):
        h = sample_channel(2, rng)
        a, a_omega, b = covariance_closed_form_2x2(golden, h)
        assert a > 0 and a_omega > 0
        eq1, eq2 = equivalent_channels(golden, h)
        g1 = np.array([[a, b], [np.conj(b), a]])
        g2 = np.array([[a_omega, nm * b], [np.conj(nm * b), a_omega]])
        assert np.linalg.norm(hermitian_gram(eq1) - g1) <= 1e-9
        assert np.linalg.norm(hermitian_gram(eq2) - g2) <= 1e-9


def test_closed_form_not_applicable(perfect4):
    with pytest.raises(NotApplicableError):
        covariance_closed_form_2x2(perfect4, np.eye(4))


def test_codespec_validation():
    with pytest.raises(ValueError, match="coincide"):
        cyclic_spec(2, 1j, np.array([[1.0, 2.0], [1.0, 2.0]]))
    with pytest.raises(ValueError, match="gamma"):
        CodeSpec(
            label="bad",
            n=2,
            gamma=2.0,
            alpha=1.0,
            omega_table=np.array([[1.0, 2.0], [1.0, -2.0]]),
            gamma_blocks=cyclic_gamma_blocks(2, 2.0),
            unitary_gamma=True,
        )
    with pytest.raises(ValueError, match="finite"):
        cyclic_spec(2, 1j, np.array([[1.0, np.inf], [1.0, -2.0]]))


def test_spec_file_roundtrip(tmp_path, golden):
    path = tmp_path / "golden.json"
    save_spec(golden, path)
    loaded = load_spec(path)
    assert loaded.label == golden.label
    assert loaded.n == golden.n
    assert loaded.gamma == golden.gamma
    assert np.array_equal(loaded.omega_table, golden.omega_table)
    assert all(np.array_equal(a, b) for a, b in zip(loaded.gamma_blocks, golden.gamma_blocks))


def test_spec_file_explicit_blocks_roundtrip(tmp_path, perfect4):
    path = tmp_path / "perfect4.json"
    save_spec(perfect4, path, cyclic_blocks=False)
    doc = json.loads(path.read_text())
    assert isinstance(doc["gamma_blocks"], list)
    loaded = load_spec(path)
    assert all(np.array_equal(a, b) for a, b in zip(loaded.gamma_blocks, perfect4.gamma_blocks))


def test_spec_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(SpecParseError, match="invalid JSON"):
        load_spec(bad)

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"label": "x", "n": 2, "gamma": [0, 1], "omega_table": []}))
    with pytest.raises(SpecParseError, match="gamma_blocks"):
        load_spec(missing)

    badfield = tmp_path / "badfield.json"
    badfield.write_text(
        json.dumps(
            {
                "label": "x",
                "n": 2,
                "gamma": [0, 1],
                "omega_table": [[[1, 0], [2, 0]], [[1, 0], "oops"]],
                "gamma_blocks": "cyclic",
            }
        )
    )
    with pytest.raises(SpecParseError, match=r"omega_table\[1\]\[1\]"):
        load_spec(badfield)


def test_spec_from_source_variants(tmp_path):
    assert spec_from_source("golden").label == "golden"
    omega_path = tmp_path / "omega.json"
    omega_path.write_text(json.dumps([[[1, 0], [2, 0]], [[1, 0], [-2, 0]]]))
    spec = spec_from_source("cyclic:2:0:1", omega_file=omega_path)
    assert spec.n == 2 and spec.gamma == 1j
    with pytest.raises(SpecParseError, match="omega table file"):
        spec_from_source("cyclic:2:0:1")
    with pytest.raises(SpecParseError):
        spec_from_source("cyclic:2:zero:1", omega_file=omega_path)
