import numpy as np
import pytest

from calogero_pencil.matpair import DomainError, PhasePoint, TangentPair, commutator, conjugate
from calogero_pencil.reduction import (
    SectionPoint,
    canonical_form,
    check_section,
    diagonal_generator_system,
    projected_flow,
    random_conjugator,
    random_section_point,
    sorted_eigenbasis,
    tangent_decompose,
)


def test_section_point_validation():
    A = np.array([[0.0, -0.5], [0.5, 1.0]])
    sp_ = SectionPoint(PhasePoint(A, np.diag([-1.0, 1.0])), (-1,))
    assert sp_.pattern == (-1,)
    with pytest.raises(DomainError):
        SectionPoint(PhasePoint(A, np.diag([1.0, -1.0])), (-1,))
    with pytest.raises(DomainError):
        SectionPoint(PhasePoint(A, np.diag([-1.0, 1.0])), (1,))
    with pytest.raises(ValueError):
        check_section(PhasePoint(A, np.diag([-1.0, 1.0])), (1, 1))


def test_sorted_eigenbasis_sign_convention(rng):
    M = rng.normal(size=(4, 4))
    M = M + M.T
    w, S = sorted_eigenbasis(M)
    assert np.all(np.diff(w) > 0)
    assert np.allclose(M @ S, S * w)
    for j in range(4):
        first = S[np.flatnonzero(np.abs(S[:, j]) > 1e-14)[0], j]
        assert first > 0


def test_canonical_form_of_section_point_is_identity(rng):
    q = random_section_point(3, rng)
    sp_, g = canonical_form(q.point)
    assert np.array_equal(g, np.eye(3))
    assert np.array_equal(sp_.A, q.A) and np.array_equal(sp_.B, q.B)


def test_canonical_form_two_by_two_minus_pattern():
    A = np.array([[3.0, -1.0], [1.0, -3.0]])
    sp_, _ = canonical_form(PhasePoint(A, np.diag([-1.0, 1.0])))
    assert sp_.pattern == (-1,)
    assert sp_.A[0, 1] == -sp_.A[1, 0]


def test_canonical_form_roundtrip(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            q = random_section_point(n, rng)
            g0 = random_conjugator(n, rng)
            sp_, g = canonical_form(conjugate(g0, q.point))
            assert sp_.pattern == q.pattern
            assert np.allclose(sp_.A, q.A, atol=1e-8) and np.allclose(sp_.B, q.B, atol=1e-8)
            back = conjugate(g, conjugate(g0, q.point))
            assert back.allclose(q.point, atol=1e-8)


def test_canonical_form_rejects_points_outside_M():
    with pytest.raises(DomainError):
        canonical_form(PhasePoint(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])))


def test_decompose_section_tangent_is_fixed(rng):
    sp_ = random_section_point(3, rng)
    eps = np.array(sp_.pattern, dtype=float)
    V = rng.normal(size=(3, 3))
    V[[1, 2], [0, 1]] = rng.normal(size=2)
    V[[0, 1], [1, 2]] = eps * V[[1, 2], [0, 1]]
    t = TangentPair(V, np.diag(rng.normal(size=3)))
    dec = tangent_decompose(sp_, t)
    assert np.allclose(dec.generator, 0, atol=1e-12)
    assert dec.section_tangent.allclose(t, atol=1e-12)


def test_decompose_recovers_known_generator(rng):
    for n in (2, 3, 5):
        sp_ = random_section_point(n, rng)
        zeta = rng.normal(size=(n, n))
        zeta -= np.trace(zeta) / n * np.eye(n)
        t = TangentPair(commutator(sp_.A, zeta), commutator(sp_.B, zeta))
        dec = tangent_decompose(sp_, t)
        assert np.allclose(dec.generator, zeta, atol=1e-9)
        assert dec.section_tangent.norm() < 1e-9


def test_decompose_residual(rng):
    for n in (2, 3, 4, 6):
        sp_ = random_section_point(n, rng)
        t = TangentPair(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
        dec = tangent_decompose(sp_, t)
        residual = (t - dec.section_tangent - dec.orbit_part(sp_)).norm()
        assert residual < 1e-10 * (1 + t.norm())
        assert abs(np.trace(dec.generator)) < 1e-12


def test_diagonal_system_shape(rng):
    sp_ = random_section_point(4, rng)
    M = diagonal_generator_system(sp_)
    assert M.shape == (3, 4)
    assert np.allclose(M @ np.ones(4), 0)
    assert np.linalg.matrix_rank(M) == 3


def test_projected_flow_k1(rng):
    sp_ = random_section_point(3, rng)
    f = projected_flow(sp_, 1)
    assert np.allclose(f.V, 0, atol=1e-14) and np.allclose(f.W, np.eye(3))


def test_projected_flow_two_by_two_generator(rng):
    sp_ = random_section_point(2, rng, pattern=(-1,))
    A, b = sp_.A, np.diag(sp_.B)
    dec = tangent_decompose(sp_, TangentPair(np.zeros((2, 2)), A))
    off = A[1, 0] / (b[1] - b[0])
    expected = np.array([[0.0, off], [off, 0.0]])
    diff = dec.generator - expected
    assert np.allclose(diff - np.trace(diff) / 2 * np.eye(2), 0, atol=1e-12)


def test_projected_flow_is_tangent_to_section(rng):
    for k in (2, 3, 4):
        sp_ = random_section_point(4, rng)
        f = projected_flow(sp_, k)
        assert np.allclose(f.W, np.diag(np.diag(f.W)), atol=0.0)
        eps = np.array(sp_.pattern, dtype=float)
        assert np.allclose(np.diag(f.V, 1), eps * np.diag(f.V, -1), atol=1e-10)


def test_random_section_point_with_pattern(rng):
    sp_ = random_section_point(4, rng, pattern=(1, -1, 1))
    assert sp_.pattern == (1, -1, 1)
