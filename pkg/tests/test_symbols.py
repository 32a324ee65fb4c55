import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxlab import catalog
from fluxlab.errors import PreconditionError
from fluxlab.operator import make_operator
from fluxlab.symbols import (
    cancelling_cocancelling,
    classify,
    hyperbolic_direction_test,
    kernel_projection,
    pseudo_inverse,
    wave_cone,
)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 4), st.integers(0, 2**31 - 1))
def test_moore_penrose_identities(rows, cols, rank_cut, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(rows, cols))
    if rank_cut and min(rows, cols) > 1:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        s[-min(rank_cut, len(s) - 1):] = 0
        M = (U * s) @ Vt
    P = pseudo_inverse(M)
    nM = max(np.linalg.norm(M, 2), 1e-300)
    assert np.allclose(M @ P @ M, M, atol=1e-10 * nM)
    assert np.allclose(P @ M @ P, P, atol=1e-10 * max(np.linalg.norm(P, 2), 1) * nM)
    assert np.allclose((M @ P).T, M @ P, atol=1e-10)
    assert np.allclose((P @ M).T, P @ M, atol=1e-10)
    assert np.allclose(P, np.linalg.pinv(M, rcond=1e-12), atol=1e-8 * max(1, np.linalg.norm(P, 2)))


def test_pseudo_inverse_examples():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert np.allclose(pseudo_inverse(M), np.linalg.inv(M), atol=1e-10)
    assert np.all(pseudo_inverse(np.zeros((3, 2))) == 0)


def test_exterior_derivative_pseudo_inverse_is_interior_product():
    # on the image of xi ^ . the pseudo-inverse acts as (xi/|xi|^2) _| .
    op = catalog.exterior_derivative(3)
    xi = np.array([0.3, -1.2, 0.7])
    A = op.symbol(np.zeros(3), xi)
    iota = catalog.interior_matrix(3, xi / (xi @ xi))
    rng = np.random.default_rng(0)
    w = A @ rng.normal(size=8)
    assert np.allclose(pseudo_inverse(A) @ w, iota @ w, atol=1e-12)


def test_kernel_projection():
    assert np.allclose(kernel_projection(catalog.total_derivative(2), np.zeros(2), [0.6, 0.8]), np.eye(1))
    xi = np.array([0.6, 0.8])
    P = kernel_projection(catalog.divergence(2), np.zeros(2), xi)
    assert np.allclose(P, np.outer(xi, xi), atol=1e-12)
    # curl on matrix fields: complement projects onto rank-one a (x) xi
    xi3 = np.array([1.0, 2.0, 2.0]) / 3
    Q = kernel_projection(catalog.curl_matrix(3), np.zeros(3), xi3, complement=True)
    a = np.array([0.4, -1.0, 2.0])
    rank_one = np.outer(a, xi3).reshape(-1)
    assert np.allclose(Q @ rank_one, rank_one, atol=1e-12)
    assert np.linalg.matrix_rank(Q, tol=1e-8) == 3


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["div-3", "curl-3", "d-3", "mizohata-1", "dirac-cl11"]), st.integers(0, 2**31 - 1))
def test_kernel_projection_properties(op_id, seed):
    op = catalog.get_operator(op_id)
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=op.n)
    xi /= np.linalg.norm(xi)
    x = rng.uniform(-1, 1, op.n)
    P = kernel_projection(op, x, xi)
    assert np.allclose(P @ P, P, atol=1e-10)
    assert np.allclose(P, P.T, atol=1e-10)
    assert np.allclose(op.symbol(x, xi) @ (np.eye(op.dimE) - P), 0, atol=1e-10)


def test_classification_examples():
    D = classify(catalog.total_derivative(2, 2), samples=200)
    assert D.elliptic and D.complex_elliptic
    cr = classify(catalog.cauchy_riemann(), samples=200)
    assert cr.elliptic and not cr.complex_elliptic
    z = np.array([re + 1j * im for re, im in cr.complex_argmin])
    assert abs(z[0] ** 2 + z[1] ** 2) < 1e-3 * np.vdot(z, z).real
    m0 = classify(catalog.mizohata(1), x=np.zeros(2), samples=200)
    assert not m0.elliptic
    degenerate = np.array(m0.characteristic_directions)
    assert np.allclose(np.abs(degenerate), [0, 1], atol=1e-12)
    assert classify(catalog.mizohata(1), x=np.array([0.3, 0.0]), samples=200).elliptic


def test_elliptic_implies_single_rank_and_complex_implies_real():
    for op in catalog.operator_objects():
        rep = classify(op, samples=50 * op.n, complex_samples=200)
        if rep.elliptic:
            assert list(rep.rank_histogram) == [op.dimE]
        if rep.complex_elliptic:
            assert rep.elliptic


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["cauchy-riemann", "div-2", "d-2", "mizohata-1", "dirac-cl11"]), st.floats(0.01, 100))
def test_classify_invariant_under_positive_scaling(op_id, c):
    op = catalog.get_operator(op_id)
    a = classify(op, samples=120, complex_samples=60)
    b = classify(op.scaled(c), samples=120, complex_samples=60)
    keys = ["elliptic", "complex_elliptic", "constant_rank", "cancelling", "cocancelling"]
    assert {k: getattr(a, k) for k in keys} == {k: getattr(b, k) for k in keys}
    assert a.rank_histogram == b.rank_histogram


def test_wave_cone():
    assert wave_cone(catalog.total_derivative(2), np.zeros(2), 100) == []
    for xi, K in wave_cone(catalog.curl_matrix(3), np.zeros(3), 150):
        assert K.shape[1] == 3
        for col in K.T:
            s = np.linalg.svd(col.reshape(3, 3), compute_uv=False)
            assert s[1] <= 1e-8 * s[0]
    for xi, K in wave_cone(catalog.dirac_cl11(), np.zeros(2), 300):
        assert abs(xi[0] ** 2 - xi[1] ** 2) < 1e-6


def test_cancelling_cocancelling_examples():
    (canc, _), (cocanc, _) = cancelling_cocancelling(catalog.divergence(3))
    assert cocanc
    (canc, _), _ = cancelling_cocancelling(catalog.symmetric_gradient(3))
    assert canc
    # every A_j kills the first basis vector: common kernel of dimension >= 1
    A = np.zeros((2, 2, 3))
    A[0, :, 1:] = np.eye(2)
    A[1, :, 1:] = np.array([[0.0, -1.0], [1.0, 0.0]])
    _, (cocanc, dim) = cancelling_cocancelling(make_operator("shared-null", A))
    assert not cocanc and dim >= 1


def test_hyperbolic_direction():
    cert = hyperbolic_direction_test(catalog.dirac_cl11(), np.array([1.0, 0.0]))
    assert cert.hyperbolic and cert.degenerate_directions
    # degenerate directions xi - lambda nu of the symbol lie on the light cone
    for d in map(np.array, cert.degenerate_directions):
        assert abs(d[0] ** 2 - d[1] ** 2) < 1e-8 * (d @ d)
    assert not hyperbolic_direction_test(catalog.cauchy_riemann(), np.array([0.6, 0.8])).hyperbolic
    one = make_operator("d/dx", np.array([[[1.0]]]))
    assert hyperbolic_direction_test(one, np.array([1.0])).hyperbolic
    with pytest.raises(PreconditionError):
        hyperbolic_direction_test(catalog.mizohata(1), np.array([0.0, 1.0]), x=np.zeros(2))
    with pytest.raises(PreconditionError):
        hyperbolic_direction_test(catalog.divergence(2), np.array([1.0, 0.0]))
