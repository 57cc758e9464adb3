"""Tests for random spaces, Orlicz functions and subspace vectors"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqspace.sampling import (
    hyperplane_family,
    kernel_basis,
    periodic_sum_zero_functionals,
    random_block_spec,
    random_hyperplane_vector,
    random_lorentz_space,
    random_orlicz_function,
    random_orlicz_space,
)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_orlicz_function_is_normalized(seed):
    rng = np.random.default_rng(seed)
    phi = random_orlicz_function(rng)
    assert phi(1.0) == pytest.approx(1.0, abs=1e-9)
    assert phi(0.0) == 0.0
    t = np.linspace(0.0, 3.0, 61)
    slopes = np.diff(phi(t)) / np.diff(t)
    assert np.all(np.diff(slopes) >= -1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_random_spaces_and_blocks(seed, dim):
    rng = np.random.default_rng(seed)
    space = random_lorentz_space(rng, dim)
    assert space.dim == dim
    assert min(space.w) >= 0.3
    assert random_orlicz_space(rng, dim).dim == dim
    blocks = random_block_spec(rng, dim)
    assert any(len(block) >= 2 for block in blocks.blocks)
    assert blocks.vectors(dim).shape == (len(blocks.blocks), dim)


def test_hyperplane_vectors_satisfy_f_of_u_is_one():
    f = np.array([1.0, 2.0, -1.0])
    assert np.dot(f, hyperplane_family(f, 0.3, -0.7)) == pytest.approx(1.0)
    u = random_hyperplane_vector(np.random.default_rng(1), f)
    assert np.dot(f, u) == pytest.approx(1.0)


def test_periodic_sum_zero_kernel():
    fs = periodic_sum_zero_functionals(3)
    assert fs.shape == (7, 9)
    basis = kernel_basis(fs)
    assert basis.shape == (9, 2)
    x = basis @ np.random.default_rng(0).standard_normal(basis.shape[1])
    np.testing.assert_allclose(fs @ x, 0.0, atol=1e-12)
    np.testing.assert_allclose(x[:3], x[3:6], atol=1e-12)
    assert x[:3].sum() == pytest.approx(0.0, abs=1e-12)
