import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from krv.kernels import FLUSH, KernelSpec, design_matrix, gram, kernel_eval

import oracles

finite = st.floats(-5, 5, allow_nan=False)


def test_gaussian_self_is_one():
    assert kernel_eval(KernelSpec.gaussian(0.3), [1.0, 2.0], [1.0, 2.0]) == 1.0


def test_gaussian_value():
    assert kernel_eval(KernelSpec.gaussian(1.0), [0.0], [1.0]) == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert kernel_eval(KernelSpec.gaussian(1.0), [0.0], [1.0]) == pytest.approx(0.60653, abs=1e-5)


def test_polynomial_value():
    assert kernel_eval(KernelSpec.polynomial(2), [1.0, 1.0], [1.0, 1.0]) == 9.0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec.gaussian(1.0), [0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        design_matrix(KernelSpec.gaussian(1.0), [[0.0]], [[1.0, 2.0]])


def test_empty_anchors():
    with pytest.raises(ValueError):
        design_matrix(KernelSpec.gaussian(1.0), [[0.0]], np.empty((0, 1)))


@pytest.mark.parametrize(
    "kwargs", [dict(family="gaussian", width=0.0), dict(family="gaussian", width=-1.0),
               dict(family="polynomial", order=0), dict(family="polynomial", order=1.5),
               dict(family="linear"), dict(family="gaussian", width=1.0, order=2)]
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        KernelSpec(**kwargs)


def test_spec_dict_roundtrip():
    for spec in (KernelSpec.gaussian(0.35), KernelSpec.polynomial(3)):
        assert KernelSpec.from_dict(spec.to_dict()) == spec


def test_self_design_diagonal():
    X = np.random.default_rng(0).normal(size=(6, 3))
    H = design_matrix(KernelSpec.gaussian(0.8), X, X).values
    np.testing.assert_array_equal(np.diag(H[:, 1:]), 1.0)
    np.testing.assert_array_equal(H[:, 0], 1.0)


def test_polynomial_single():
    H = design_matrix(KernelSpec.polynomial(2), [[1.0]], [[1.0]]).values
    np.testing.assert_array_equal(H, [[1.0, 4.0]])


@pytest.mark.parametrize("spec", [KernelSpec.gaussian(0.7), KernelSpec.polynomial(2)])
def test_design_matches_elementwise_oracle(spec):
    rng = np.random.default_rng(1)
    rows, anchors = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
    kern = (lambda u, v: oracles.gaussian(u, v, 0.7)) if spec.family == "gaussian" else (
        lambda u, v: oracles.polynomial(u, v, 2))
    expect = oracles.expand(rows.tolist(), anchors.tolist(), kern)
    np.testing.assert_allclose(design_matrix(spec, rows, anchors).values, expect, rtol=1e-12)


def test_flush_of_negligible_values():
    # exp(-800) is subnormal territory; it is flushed to exactly zero
    assert kernel_eval(KernelSpec.gaussian(0.05), [0.0], [2.0]) == 0.0
    assert gram(KernelSpec.gaussian(0.05), [[0.0]], [[2.0]])[0, 0] == 0.0
    assert kernel_eval(KernelSpec.gaussian(1.0), [0.0], [20.0]) == pytest.approx(math.exp(-200.0))
    assert math.exp(-200.0) > FLUSH


vec_pairs = st.integers(1, 5).flatmap(
    lambda d: st.tuples(st.lists(finite, min_size=d, max_size=d), st.lists(finite, min_size=d, max_size=d))
)
specs = st.one_of(
    st.floats(0.05, 3.0).map(KernelSpec.gaussian), st.integers(1, 4).map(KernelSpec.polynomial)
)


@given(vec_pairs, specs)
def test_symmetry(pair, spec):
    u, v = pair
    assert kernel_eval(spec, u, v) == kernel_eval(spec, v, u)


@given(vec_pairs, st.floats(0.05, 3.0))
def test_gaussian_range(pair, width):
    u, v = pair
    k = kernel_eval(KernelSpec.gaussian(width), u, v)
    assert 0.0 <= k <= 1.0
    if sum((a - b) ** 2 for a, b in zip(u, v)) / (2 * width * width) < 300:
        assert k > 0.0


@given(st.integers(0, 10_000), st.floats(0.1, 2.0))
def test_gaussian_gram_psd(seed, width):
    X = np.random.default_rng(seed).normal(size=(10, 3))
    K = gram(KernelSpec.gaussian(width), X, X)
    assert np.linalg.eigvalsh(K).min() >= -1e-8


@given(
    arrays(np.float64, (7, 3), elements=finite),
    arrays(np.float64, (9, 3), elements=finite),
    st.lists(st.integers(0, 8), min_size=1, max_size=9, unique=True),
    specs,
)
def test_column_locality(rows, anchors, subset, spec):
    full = design_matrix(spec, rows, anchors).values
    part = design_matrix(spec, rows, anchors[subset]).values
    np.testing.assert_array_equal(full[:, [0] + [j + 1 for j in subset]], part)


@given(arrays(np.float64, (8, 2), elements=finite), st.integers(1, 7), specs)
def test_row_blocks_bit_identical(rows, cut, spec):
    anchors = rows[::-1]
    whole = design_matrix(spec, rows, anchors).values
    parts = np.vstack([design_matrix(spec, rows[:cut], anchors).values,
                       design_matrix(spec, rows[cut:], anchors).values])
    np.testing.assert_array_equal(whole, parts)
