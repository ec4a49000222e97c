import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hardyz import _pykernels, kernels

try:
    from hardyz import _ckernels
except ImportError:  # pure install
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == _ckernels.NAME


@pytest.mark.parametrize("impl", [_pykernels, _ckernels])
def test_crc64_check_value(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    # standard CRC-64/XZ check value of the ASCII digits 1..9
    assert impl.crc64(b"123456789", 0) == 0x995DC9BBDF1939FA
    assert impl.crc64(b"", 0) == 0


@needs_c
@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=2000))
def test_crc64_backends_agree(data):
    assert _ckernels.crc64(data, 0) == _pykernels.crc64(data, 0)


@settings(max_examples=50, deadline=None)
@given(st.binary(min_size=1, max_size=500), st.data())
def test_crc64_detects_single_bit_flips(data, draw):
    i = draw.draw(st.integers(0, len(data) - 1))
    bit = draw.draw(st.integers(0, 7))
    flipped = bytearray(data)
    flipped[i] ^= 1 << bit
    assert kernels.crc64(bytes(flipped), 0) != kernels.crc64(data, 0)


@needs_c
@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 60).map(lambda n: 2 * n + 1), elements=finite),
       st.floats(1e-3, 1.0))
def test_simpson_cumsum_backends_agree(f, h):
    a = _pykernels.simpson_cumsum(f, h, 0.0, 0.0)
    b = _ckernels.simpson_cumsum(f, h, 0.0, 0.0)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-13, atol=1e-9)


def test_simpson_cumsum_exact_for_cubics():
    h = 0.1
    x = np.arange(0, 41) * h
    f = x**3 - 2 * x + 1
    sums, _ = kernels.simpson_cumsum(f, h, 0.0, 0.0)
    X = x[::2]
    np.testing.assert_allclose(sums, X**4 / 4 - X**2 + X, rtol=0, atol=1e-12)


def test_simpson_cumsum_resume_is_bitwise():
    f = np.sin(np.linspace(0, 30, 2001))
    full, fc = kernels.simpson_cumsum(f, 0.015, 0.0, 0.0)
    head, hc = kernels.simpson_cumsum(f[:1001], 0.015, 0.0, 0.0)
    tail, tc = kernels.simpson_cumsum(f[1000:], 0.015, head[-1], hc[-1])
    assert np.array_equal(np.concatenate([head, tail[1:]]), full)


def _filon_inputs(n, lo, hi):
    u = np.linspace(lo, hi, 2 * n + 1)
    F = np.cos(3 * u) + u**2
    center = u[1::2]
    va = u[0:-1:2] - center
    vc = u[2::2] - center
    return tuple(np.ascontiguousarray(a) for a in (va, vc, center, F[0:-1:2], F[1::2], F[2::2]))


@pytest.mark.parametrize("impl", [_pykernels, _ckernels])
def test_filon_exact_for_quadratics(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    # piecewise quadratic data is integrated exactly against exp(-i w u)
    u = np.linspace(0.0, 2.0, 41)
    F = 1.0 + 2.0 * u - 0.5 * u**2
    center = u[1::2]
    args = tuple(np.ascontiguousarray(a) for a in
                 (u[0:-1:2] - center, u[2::2] - center, center, F[0:-1:2], F[1::2], F[2::2]))
    omegas = np.array([0.0, 0.3, 7.0, 250.0])
    out = np.empty(4, dtype=np.complex128)
    impl.filon_sweep(*args, omegas, out)
    import mpmath
    for w, got in zip(omegas, out):
        ref = mpmath.quad(lambda x: (1 + 2 * x - 0.5 * x**2) * mpmath.exp(-1j * w * x), [0, 1, 2])
        assert abs(got - complex(ref)) < 1e-11


@needs_c
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.floats(-50, 50))
def test_filon_backends_agree(n, w):
    args = _filon_inputs(n, 0.5, 3.0)
    omegas = np.array([w, 0.0, 1e-4])
    a = np.empty(3, dtype=np.complex128)
    b = np.empty(3, dtype=np.complex128)
    _pykernels.filon_sweep(*args, omegas, a)
    _ckernels.filon_sweep(*args, omegas, b)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_c
def test_rs_main_sum_backends_agree():
    from hardyz import _dd
    from hardyz.special import theta

    t = np.sort(np.random.default_rng(3).uniform(10, 1e4, 200))
    n = np.floor(np.sqrt(t / (2 * math.pi))).astype(np.int64)
    logn, _ = _dd.log_table(64)
    rsq = np.zeros(65)
    rsq[1:] = 1 / np.sqrt(np.arange(1, 65))
    th = theta(t)
    a = np.empty_like(t)
    b = np.empty_like(t)
    _pykernels.rs_main_sum(t, th, n, logn, rsq, a)
    _ckernels.rs_main_sum(t, th, n, logn, rsq, b)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-11)


@pytest.mark.parametrize("impl", [_pykernels, _ckernels])
def test_dirichlet_convolution(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    prev = np.ones(101, dtype=np.int64)
    prev[0] = 0
    out = np.empty_like(prev)
    impl.dirichlet_one_convolve(prev, out)
    assert [int(out[n]) for n in (1, 6, 12, 97, 100)] == [1, 4, 6, 2, 9]


@pytest.mark.parametrize("impl", [_pykernels, _ckernels])
def test_kahan_sum(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    x = np.array([1.0, 1e-16] * 1000)
    s, c = impl.kahan_sum(x, 0.0, 0.0)
    assert s - c == pytest.approx(1000 + 1000e-16, abs=1e-12)
