import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mslab.subspace import (
    Subspace,
    Tolerance,
    canonicalize,
    complement,
    contains,
    distance,
    equal,
    full_subspace,
    involution,
    join,
    matrix_unit,
    meet,
    product,
    subspace_from_json,
    subspace_to_json,
    zero_subspace,
)

E11 = matrix_unit(2, 0, 0)
E12 = matrix_unit(2, 0, 1)
E21 = matrix_unit(2, 1, 0)
E22 = matrix_unit(2, 1, 1)
I2 = np.eye(2)


def d2():
    return canonicalize([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


def test_tolerance_requires_positive_eps():
    with pytest.raises(ValueError):
        Tolerance(0.0)
    with pytest.raises(ValueError):
        Tolerance(-1e-9)


class TestCanonicalize:
    def test_zero_matrix_spans_nothing(self):
        assert canonicalize([np.zeros((2, 2))]).dim == 0

    def test_dependent_generators_collapse(self):
        p = canonicalize([I2, 3 * I2])
        assert p.dim == 1
        assert distance(I2, p) < 1e-12

    def test_diagonal_algebra(self):
        p = d2()
        assert p.dim == 2
        assert contains(p, canonicalize([I2]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            canonicalize([np.eye(2), np.eye(3)])

    def test_ambient_zero_rejected(self):
        with pytest.raises(ValueError):
            canonicalize([np.zeros((0, 0))])
        with pytest.raises(ValueError):
            zero_subspace(0)

    def test_empty_generators_need_ambient(self):
        with pytest.raises(ValueError):
            canonicalize([])
        assert canonicalize([], n=2).dim == 0

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            canonicalize([np.array([[np.nan, 0.0], [0.0, 0.0]])])

    def test_canonicalize_idempotent(self):
        p = canonicalize([E11 + E12, E21, I2])
        again = canonicalize(p.basis)
        assert equal(p, again)

    def test_basis_is_orthonormal(self):
        p = canonicalize([E11 + E12, E11, E22 + 2 * E21])
        gram = p.vecs @ p.vecs.conj().T
        assert np.abs(gram - np.eye(p.dim)).max() < 1e-12


class TestJoin:
    def test_join_of_spin_arrows_is_diagonal_algebra(self, spin_half):
        assert equal(join(spin_half["z_up"], spin_half["z_down"]), spin_half["z"])

    def test_zero_is_unit(self):
        p = canonicalize([E11 + E12])
        assert equal(join(p, zero_subspace(2)), p)
        assert equal(join(zero_subspace(2), p), p)

    def test_orthogonal_generators(self):
        j = join(canonicalize([E11]), canonicalize([E12]))
        assert j.dim == 2
        assert contains(j, canonicalize([E11]))
        assert contains(j, canonicalize([E12]))

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            join(zero_subspace(2), zero_subspace(3))


class TestMeet:
    def test_transverse_algebras_meet_in_unit_span(self, spin_half):
        m = meet(spin_half["x"], spin_half["z"])
        assert m.dim == 1
        assert equal(m, spin_half["e"])

    def test_opposite_arrows_meet_is_zero(self, spin_half):
        assert meet(spin_half["z_up"], spin_half["z_down"]).dim == 0

    def test_idempotent(self):
        p = canonicalize([E11, E12 + E21])
        assert equal(meet(p, p), p)


class TestProduct:
    def test_orthogonal_projections_annihilate(self, spin_half):
        assert product(spin_half["z_up"], spin_half["z_down"]).dim == 0

    def test_unit_span_is_neutral(self, spin_half):
        e = spin_half["e"]
        for name in ("z", "x", "z_up", "x_down", "1"):
            p = spin_half[name]
            assert equal(product(e, p), p)
            assert equal(product(p, e), p)

    def test_transverse_arrows_annihilate(self, spin_half):
        assert product(spin_half["x_up"], spin_half["x_down"]).dim == 0


class TestInvolution:
    def test_matrix_unit_adjoint(self):
        assert equal(involution(canonicalize([E12])), canonicalize([E21]))

    def test_diagonal_algebra_self_adjoint(self, spin_half):
        # adjoint of each basis matrix stays diagonal, so the span is fixed
        z = spin_half["z"]
        adjoints = canonicalize([b.conj().T for b in z.basis])
        assert equal(adjoints, z)
        assert equal(involution(z), z)

    def test_projection_span_self_adjoint(self, spin_half):
        x_up = spin_half["x_up"]
        assert np.abs(x_up.basis[0] - x_up.basis[0].conj().T).max() < 1e-12
        assert equal(involution(x_up), x_up)

    def test_involution_twice_is_identity(self):
        p = canonicalize([E12 + 2j * E21, E11])
        assert equal(involution(involution(p)), p)


class TestOrder:
    def test_algebra_contains_its_arrow(self, spin_half):
        assert contains(spin_half["z"], spin_half["z_up"])

    def test_arrow_does_not_contain_algebra(self, spin_half):
        assert not contains(spin_half["z_up"], spin_half["z"])

    def test_equal_after_recanonicalization(self):
        p = canonicalize([E11 + E12, E22])
        assert equal(p, canonicalize(p.basis))

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            contains(zero_subspace(2), zero_subspace(3))


class TestDistance:
    def test_member_has_distance_zero(self):
        assert distance(I2, canonicalize([I2])) == pytest.approx(0.0, abs=1e-12)

    def test_unit_off_diagonal_to_diagonals(self):
        # E12 is unit-norm and orthogonal to every diagonal matrix, so the
        # residual after projection is E12 itself.
        assert distance(E12, d2()) == pytest.approx(1.0, abs=1e-12)

    def test_zero_matrix(self):
        p = canonicalize([E11 + E12])
        assert distance(np.zeros((2, 2)), p) == pytest.approx(0.0, abs=1e-12)


class TestLatticeLaws:
    """Seeded bulk sampling of the order/algebra laws, ambient 2 and 3."""

    def _samples(self, count=500):
        rng = np.random.default_rng(42)
        from conftest import make_random_subspace

        for _ in range(count):
            n = int(rng.integers(2, 4))
            yield (
                make_random_subspace(rng, n),
                make_random_subspace(rng, n),
                make_random_subspace(rng, n),
            )

    def test_join_meet_laws(self):
        for p, q, r in self._samples(500):
            assert equal(join(p, q), join(q, p))
            assert equal(meet(p, q), meet(q, p))
            assert equal(join(join(p, q), r), join(p, join(q, r)))
            assert equal(meet(meet(p, q), r), meet(p, meet(q, r)))
            assert equal(join(p, meet(p, q)), p)
            assert equal(meet(p, join(p, q)), p)
            # containment is a partial order
            assert contains(join(p, q), p)
            assert contains(p, meet(p, q))
            if contains(p, q) and contains(q, p):
                assert equal(p, q)
            # modular dimension identity
            assert join(p, q).dim + meet(p, q).dim == p.dim + q.dim

    def test_product_laws(self):
        for p, q, r in self._samples(250):
            assert equal(product(product(p, q), r), product(p, product(q, r)))
            assert equal(
                product(join(p, q), r), join(product(p, r), product(q, r))
            )
            assert equal(
                product(r, join(p, q)), join(product(r, p), product(r, q))
            )
            assert product(zero_subspace(p.n), p).dim == 0

    def test_involution_laws(self):
        for p, q, _ in self._samples(250):
            assert equal(involution(involution(p)), p)
            assert equal(
                involution(product(p, q)), product(involution(q), involution(p))
            )


class TestStablyGelfand:
    def test_partial_isometry_spans_are_regular(self):
        rng = np.random.default_rng(7)
        for n in (2, 3):
            for _ in range(100):
                g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
                u, _, w = np.linalg.svd(g)
                r = int(rng.integers(1, n + 1))
                v = u[:, :r] @ w[:r, :]
                p = canonicalize([v])
                assert equal(product(product(p, involution(p)), p), p)

    def test_lax_regularity_promotes_on_closure(self, half_closure):
        for p in half_closure.elements:
            t = product(product(p, involution(p)), p)
            if contains(p, t):
                assert equal(t, p)


small = st.integers(min_value=-3, max_value=3)


@st.composite
def matrices(draw, n=2):
    entries = draw(
        st.lists(st.tuples(small, small), min_size=n * n, max_size=n * n)
    )
    return np.array([complex(a, b) for a, b in entries]).reshape(n, n)


@given(matrices(), matrices())
@settings(max_examples=150, deadline=None)
def test_involution_antihomomorphism_hypothesis(a, b):
    p, q = canonicalize([a]), canonicalize([b])
    assert equal(involution(product(p, q)), product(involution(q), involution(p)))


@given(matrices(), matrices(), matrices())
@settings(max_examples=150, deadline=None)
def test_absorption_hypothesis(a, b, c):
    p, q, r = canonicalize([a]), canonicalize([b]), canonicalize([c])
    assert equal(join(p, meet(p, join(q, r))), p)


def test_complement_dimensions():
    p = d2()
    c = complement(p)
    assert c.dim == 2
    assert meet(p, c).dim == 0
    assert join(p, c).dim == 4


def test_full_subspace_is_top():
    top = full_subspace(2)
    assert top.dim == 4
    assert contains(top, d2())


def test_json_round_trip(spin_half):
    for name in ("0", "e", "z", "x_up", "1"):
        p = spin_half[name]
        doc = subspace_to_json(p)
        assert doc["n"] == 2
        assert equal(subspace_from_json(doc), p)
