import json
from fractions import Fraction
from pathlib import Path

import pytest

from oracle import FROZEN
from tractor_poisson.exact_linalg import SparseMatrix, nullspace
from tractor_poisson.forms import KernelElement, interior, load_kernel, restrict_values
from tractor_poisson.kernels import (
    FROM_BOTTOM,
    TANGENT,
    build_kernel,
    build_sigma,
    chain_weight,
    homology,
    image_membership,
    invariant_subspace,
    is_invariant,
    m_act,
    uniqueness_probe,
    value_defects,
)
from tractor_poisson.lie import AlgebraModel, mat_identity

DATA = Path(__file__).parent / "data"
frozen = json.loads(FROZEN.read_text())


def test_E_star_spans_invariant_scalar_one_forms(ctx):
    c = ctx(3).calc()
    one = mat_identity(c.vdim)
    cands = [KernelElement(c.space, (1, 0), {(i,): one}) for i in c.space.p_indices]
    for i in c.space.q_indices:
        cands.append(KernelElement(c.space, (0, 1), {(i,): one}))
    rows = []
    for g in range(len(c.algebra.m_indices)):
        for bd in ((1, 0), (0, 1)):
            imgs = [m_act(c, g, x) if x.bidegree == bd else KernelElement(c.space, bd) for x in cands]
            rows.append(imgs)
    cols = []
    for j in range(len(cands)):
        col = {}
        off = 0
        for imgs in rows:
            for i, x in imgs[j].to_vector().items():
                col[off + i] = x
            off += c.space.kernel_dim(*imgs[j].bidegree)
        cols.append(col)
    ns = nullspace(SparseMatrix.from_columns(max(max(c_) for c_ in cols if c_) + 1, cols))
    assert ns.vectors == [{0: Fraction(1)}]
    assert is_invariant(c, cands[0])


def test_m_action_kills_identity_constant(ctx):
    c = ctx(3).calc()
    x = KernelElement.constant(c.space, mat_identity(c.vdim))
    assert is_invariant(c, x)
    assert not is_invariant(c, KernelElement.constant(c.space, {(1, 1): Fraction(1)}))


@pytest.mark.parametrize("k", [Fraction(1), Fraction(2), Fraction(5, 3)])
def test_sigma_recurrence(ctx, k):
    sig = build_sigma(ctx(3).calc())
    assert sig.at(k).scale(k) + sig.at(-1) == sig.at(k - 1).scale(k + 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sigma_properties(ctx, n):
    c = ctx(n).calc()
    sig = build_sigma(c)
    for k in (Fraction(1), Fraction(3, 2), Fraction(n - 1)):
        s = sig.at(k)
        assert c.d_K_theta(s).is_zero()
        assert is_invariant(c, s)
        dps = c.d_P(s)
        assert restrict_values(dps, 1).is_zero()
        assert not value_defects(dps, TANGENT)
    sm = sig.at(-1)
    assert interior({0: Fraction(1)}, sm).is_zero()
    assert restrict_values(sm, 0).is_zero()


def test_sigma_itself_is_not_tangent_valued(ctx):
    # the V_1 / V_T statements hold for d_P sigma_k, not for sigma_k
    c = ctx(3).calc()
    s = build_sigma(c).at(1)
    assert not restrict_values(s, 1).is_zero()
    assert value_defects(s, TANGENT)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_kernel_frozen(ctx, n, k):
    phi = ctx(n).kernel(k).phi
    assert phi == load_kernel((DATA / f"kernel_n{n}_k{k}.txt").read_text())


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kernel_properties(ctx, n):
    c = ctx(n).calc()
    for k in range(1, n):
        K = ctx(n).kernel(k)
        phi = K.phi
        assert not phi.is_zero()
        assert is_invariant(c, phi)
        assert restrict_values(phi, 1).is_zero()
        assert not value_defects(phi, TANGENT)
        assert c.P_codiff(phi).is_zero()
        assert c.P_codiff(c.d_P(phi)).is_zero()
        assert c.delta_K(phi).is_zero()
        assert c.laplace_K(phi).is_zero()
        span = invariant_subspace(c, k, n - k, TANGENT)
        assert span.contains(phi.to_vector())


def test_edge_cases(ctx):
    c = ctx(3).calc()
    with pytest.raises(ValueError):
        build_kernel(c, 0)
    with pytest.raises(ValueError):
        build_kernel(c, 3)
    assert build_kernel(c, 0, allow_edge=True).phi.is_zero()


def test_image_membership_examples(ctx):
    c = ctx(4).calc()
    phi = ctx(4).kernel(2).phi
    ok, pre = image_membership(c, interior({0: Fraction(1)}, phi), certificate=True)
    assert ok and c.P_codiff(pre) == interior({0: Fraction(1)}, phi)
    assert image_membership(c, KernelElement(c.space, (1, 1)))
    top = KernelElement(c.space, (0, 0), {(): {(0, 0): Fraction(1)}})
    assert not image_membership(c, top)


def test_image_membership_non_invariant(ctx):
    c = ctx(2).calc()
    x = KernelElement(c.space, (0, 0), {(): {(1, 3): Fraction(1)}})
    ok, pre = image_membership(c, x, certificate=True)
    assert ok and c.P_codiff(pre) == x


@pytest.mark.parametrize("n", [3, 4])
def test_uniqueness_dimensions(ctx, n):
    c = ctx(n).calc()
    dims = [len(uniqueness_probe(c, k)) for k in range(1, n)]
    expected = {3: [1, 1], 4: [1, 2, 1]}[n]
    assert dims == expected


def test_extra_middle_solution_is_even_under_reflection(ctx):
    """At n = 4, k = 2 the second solution has the opposite parity to phi_2."""
    c = ctx(4).calc()
    n = 4
    phi = ctx(4).kernel(2).phi
    sols = uniqueness_probe(c, 2)

    def reflect(x):
        # flip the first V_0 coordinate on the quotient legs and on both value legs
        flip = {1, n + 1}
        terms = {}
        for m, f in x.terms.items():
            s = (-1) ** sum(1 for i in m if i in flip)
            terms[m] = {(r, col): v * s * (-1 if r == 1 else 1) * (-1 if col == 1 else 1) for (r, col), v in f.items()}
        return KernelElement(c.space, x.bidegree, terms)

    assert reflect(phi) == -phi
    assert len(sols) == 2
    # the solution space splits into one odd and one even line
    odd = [s + reflect(s).scale(-1) for s in sols]
    even = [s + reflect(s) for s in sols]
    assert any(not x.is_zero() for x in odd)
    assert any(not x.is_zero() for x in even)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_homology_frozen(n):
    tab = homology(AlgebraModel(n))
    assert [h.homology for h in tab] == frozen["homology"][str(n)]
    assert [h.homology for h in homology(AlgebraModel(n), "dual")] == frozen["homology"][str(n)]
    assert tab[0].weights == ((-1, 1),)
    for h in tab[1:n]:
        assert h.weights == ((h.k, h.homology),)
    assert tab[n].weights == ((n + 1, 1),)


def test_chain_weight():
    assert chain_weight(3, (), 0) == 1
    assert chain_weight(3, (1, 2), 4) == 1
    assert chain_weight(3, (1,), 2) == 1


def test_value_constraints():
    from tractor_poisson.forms import FormSpace

    sp = FormSpace(2)
    x = KernelElement(sp, (0, 0), {(): {(0, 1): Fraction(1), (3, 1): Fraction(1)}})
    assert not value_defects(x, TANGENT)
    assert value_defects(x, FROM_BOTTOM)
    assert not value_defects(KernelElement(sp, (0, 0), {(): {(2, 3): Fraction(1)}}), FROM_BOTTOM)
