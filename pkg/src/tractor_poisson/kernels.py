"""Invariant kernels: E*, d_P E*, the sigma family, the Poisson kernels, and
the solvers around them (M-invariant subspaces, homology, image membership).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .exact_linalg import RowReducer, SparseMatrix, SubspaceBasis, nullspace, solve
from .forms import FormSpace, KernelElement, wedge_power, wedge_scalar
from .lie import Mat, mat_add, mat_mul
from .operators import ChainComplex, KernelCalculus

END = "End"
TANGENT = "L(V,V_T)"
FROM_BOTTOM = "L(V_-1,V)"
VALUE_CONSTRAINTS = (END, TANGENT, FROM_BOTTOM)


# ---------------------------------------------------------------------------
# M-action and invariant subspaces


def m_act(calc: KernelCalculus, g: int, phi: KernelElement) -> KernelElement:
    """Infinitesimal action of the g-th so(n) basis element on a kernel."""
    q = calc.quotient
    x = calc.true_algebra.basis[calc.true_algebra.m_indices[g]]
    act = q.m_action[g]
    # coadjoint: X.e^a = -sum_b e^a([X, e_b]) e^b
    co: Dict[int, Dict[int, Fraction]] = {}
    for b in range(q.dim):
        for a_, c in act[b].items():
            co.setdefault(a_, {})[b] = -c
    out: Dict[tuple, Mat] = {}

    def put(m, f, c=1):
        h = mat_add(out.get(m, {}), f, c)
        if h:
            out[m] = h
        else:
            out.pop(m, None)

    for m, f in phi.terms.items():
        put(m, mat_add(mat_mul(x, f), mat_mul(f, x), -1))
        for s, a_ in enumerate(m):
            for b, c in co.get(a_, {}).items():
                if b in m and b != a_:
                    continue
                new = tuple(sorted(m[:s] + (b,) + m[s + 1:]))
                lst = list(m[:s] + (b,) + m[s + 1:])
                # sign of sorting the substituted tuple
                inv = sum(1 for i in range(len(lst)) for j in range(i + 1, len(lst)) if lst[i] > lst[j])
                put(new, f, c * (-1 if inv & 1 else 1))
    return KernelElement(phi.space, phi.bidegree, out)


def is_invariant(calc: KernelCalculus, phi: KernelElement) -> bool:
    return all(m_act(calc, g, phi).is_zero() for g in range(len(calc.true_algebra.m_indices)))


def _character_trivial(space: FormSpace, mono, r: int, c: int) -> bool:
    # sign flips of two V_0 coordinates lie in M; invariants need an even count difference
    n = space.n
    counts = [0] * (n + 1)
    for i in mono:
        counts[i if i <= n else i - n] += 1
    for v in (r, c):
        if 1 <= v <= n:
            counts[v] += 1
    par = {x & 1 for x in counts[1:]}
    return len(par) == 1


def _value_allowed(constraint: str, d: int, r: int, c: int) -> bool:
    if constraint == FROM_BOTTOM:
        return c == d - 1
    return True


def invariant_subspace(calc: KernelCalculus, p: int, q: int, constraint: str = END) -> SubspaceBasis:
    """Basis of M-invariant (p, q) kernels obeying a value constraint.

    The so(n) generators m_{i,i+1} are stacked into one linear system on the
    basis vectors that pass the sign-flip character test.
    """
    if constraint not in VALUE_CONSTRAINTS:
        raise ValueError(f"unknown value constraint {constraint!r}")
    sp = calc.space
    d = sp.vdim
    monos = sp.monomials(p, q)
    cand: List[int] = []
    for mi, m in enumerate(monos):
        for r in range(d):
            for c in range(d):
                if _value_allowed(constraint, d, r, c) and _character_trivial(sp, m, r, c):
                    cand.append(mi * d * d + r * d + c)
    rows: Dict[int, Dict[int, Fraction]] = {}
    gens = [calc.true_algebra.m_indices.index(a) for a in calc.true_algebra.m_generators()]
    block = sp.kernel_dim(p, q)
    for col, gidx in enumerate(cand):
        e = KernelElement.basis_element(sp, (p, q), gidx)
        for s, g in enumerate(gens):
            for i, x in m_act(calc, g, e).to_vector().items():
                rows.setdefault(s * block + i, {})[col] = x
        if constraint == TANGENT:
            # output in V_T: row 0 entry equals row d-1 entry
            mi, rc = divmod(gidx, d * d)
            r, c = divmod(rc, d)
            if r in (0, d - 1):
                rows.setdefault(len(gens) * block + mi * d + c, {})[col] = Fraction(1 if r == 0 else -1)
    m = SparseMatrix.from_rows(len(gens) * block + block, len(cand), rows)
    ns = nullspace(m)
    vecs = [{cand[i]: x for i, x in v.items()} for v in ns.vectors]
    return SubspaceBasis(block, vecs, verify=False)


def basis_kernels(calc: KernelCalculus, p: int, q: int, constraint: str = END) -> List[KernelElement]:
    return [KernelElement.from_vector(calc.space, (p, q), v) for v in invariant_subspace(calc, p, q, constraint).vectors]


# ---------------------------------------------------------------------------
# distinguished elements


def endo_unit(d: int, r: int, c: int) -> Mat:
    return {(r, c): Fraction(1)}


def f_map(calc: KernelCalculus, i: int) -> Mat:
    """The M-equivariant map V_i -> V_1 induced by the identity, zero elsewhere."""
    if i not in (1, -1):
        raise ValueError("i must be 1 or -1")
    d = calc.vdim
    return endo_unit(d, 0, 0 if i == 1 else d - 1)


@dataclass(frozen=True)
class SigmaFamily:
    """sigma_k = k * slope + offset, a (1, 0) kernel affine in k."""

    slope: KernelElement
    offset: KernelElement

    def at(self, k) -> KernelElement:
        return self.slope.scale(k) + self.offset


def build_sigma(calc: KernelCalculus) -> SigmaFamily:
    """(k+1) E*(x)S - (k+1) d_K^theta f_1 + (n+2) d_K^theta f_{-1}, split by powers of k."""
    sp = calc.space
    es = wedge_scalar(calc.E_star, KernelElement.constant(sp, calc.rep.S))
    df1 = calc.d_K_theta(KernelElement.constant(sp, f_map(calc, 1)))
    dfm = calc.d_K_theta(KernelElement.constant(sp, f_map(calc, -1)))
    slope = es - df1
    return SigmaFamily(slope, slope + dfm.scale(calc.n + 2))


@dataclass(frozen=True)
class PoissonKernel:
    k: int
    phi1: KernelElement
    phi2: KernelElement
    phi: KernelElement


def _phi1(calc: KernelCalculus, sigma_k: KernelElement, k: int) -> KernelElement:
    n = calc.n
    inner = wedge_scalar(wedge_power(calc.dP_E_star(), n - k - 1), calc.d_P(sigma_k))
    return calc.hodge_K(wedge_scalar(calc.E_star, inner))


def _phi2(calc: KernelCalculus, sigma_m1: KernelElement, k: int) -> KernelElement:
    n = calc.n
    return calc.hodge_K(wedge_scalar(wedge_power(calc.dP_E_star(), n - k), sigma_m1))


def build_kernel(calc: KernelCalculus, k: int, sigma: Optional[SigmaFamily] = None, allow_edge: bool = False) -> PoissonKernel:
    """phi_k = k phi^(1)_k + phi^(2)_k of bidegree (k, n-k).

    ``allow_edge`` admits the formal k = 0 construction.
    """
    n = calc.n
    lo = 0 if allow_edge else 1
    if not lo <= k <= n - 1:
        raise ValueError(f"k must satisfy {lo} <= k <= n-1")
    sigma = sigma or build_sigma(calc)
    p1 = _phi1(calc, sigma.at(k), k)
    p2 = _phi2(calc, sigma.at(-1), k)
    return PoissonKernel(k, p1, p2, p1.scale(k) + p2)


def dP_kernel_closed_form(calc: KernelCalculus, k: int, sigma: Optional[SigmaFamily] = None) -> KernelElement:
    """(-1)^(n+1) (k+1) *_K((d_P E*)^(n-k) ^ d_P sigma_{k-1})."""
    n = calc.n
    sigma = sigma or build_sigma(calc)
    inner = wedge_scalar(wedge_power(calc.dP_E_star(), n - k), calc.d_P(sigma.at(k - 1)))
    return calc.hodge_K(inner).scale((k + 1) * (-1) ** (n + 1))


def value_defects(phi: KernelElement, constraint: str) -> Dict[tuple, Fraction]:
    """Coordinates that must vanish for phi to satisfy a value constraint."""
    d = phi.space.vdim
    out: Dict[tuple, Fraction] = {}
    for m, f in phi.terms.items():
        for (r, c), x in f.items():
            if constraint == FROM_BOTTOM and c != d - 1:
                out[(m, r, c)] = x
            if constraint == TANGENT and r in (0, d - 1):
                key = (m, 0, c)
                out[key] = out.get(key, 0) + (x if r == 0 else -x)
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# solvers


def combine(space: FormSpace, bidegree, basis: Sequence[KernelElement], coeffs: Dict[int, Fraction]) -> KernelElement:
    out = KernelElement(space, bidegree)
    for i, x in coeffs.items():
        out = out + basis[i].scale(x)
    return out


def constrained_subspace(calc: KernelCalculus, basis: Sequence[KernelElement], conditions) -> List[Dict[int, Fraction]]:
    """Coefficient vectors c with cond(sum c_i basis_i) = 0 for every linear cond."""
    cols = []
    for b in basis:
        col: Dict[int, Fraction] = {}
        off = 0
        for cond in conditions:
            img = cond(b)
            size = calc.space.kernel_dim(*img.bidegree)
            for i, x in img.to_vector().items():
                col[off + i] = x
            off += size
        cols.append(col)
    total = max(max((max(c) + 1 for c in cols if c), default=0), 1)
    return nullspace(SparseMatrix.from_columns(total, cols)).vectors


def uniqueness_probe(calc: KernelCalculus, k: int) -> List[KernelElement]:
    """M-invariant (k, n-k) kernels in L(V, V_T) killed by the P-codifferential,
    by the P-codifferential after d_P, and by delta_K."""
    p, q = k, calc.n - k
    basis = basis_kernels(calc, p, q, TANGENT)
    conditions = [calc.P_codiff, lambda f: calc.P_codiff(calc.d_P(f)), calc.delta_K]
    sols = constrained_subspace(calc, basis, conditions)
    return [combine(calc.space, (p, q), basis, v) for v in sols]


def image_membership(calc: KernelCalculus, phi: KernelElement, certificate: bool = False):
    """Decide whether phi lies in the image of the P-codifferential.

    M-equivariance lets invariant phi be tested against invariant preimages;
    other elements are tested against the full block.
    """
    p, q = phi.bidegree
    if phi.is_zero():
        zero = KernelElement(calc.space, (p, q + 1)) if q + 1 <= calc.n else None
        return (True, zero) if certificate else True
    if q + 1 > calc.n:
        return (False, None) if certificate else False
    if is_invariant(calc, phi):
        basis = basis_kernels(calc, p, q + 1, END)
        cols = [calc.P_codiff(b).to_vector() for b in basis]
        m = SparseMatrix.from_columns(calc.space.kernel_dim(p, q), cols)
        x = solve(m, phi.to_vector())
        pre = combine(calc.space, (p, q + 1), basis, x) if x is not None else None
    else:
        op = calc.matrix("P_codiff", p, q + 1)
        x = solve(op.matrix, phi.to_vector())
        pre = KernelElement.from_vector(calc.space, (p, q + 1), x) if x is not None else None
    if pre is not None and calc.P_codiff(pre) != phi:
        raise ArithmeticError("preimage certificate does not verify")
    ok = pre is not None
    return (ok, pre) if certificate else ok


@dataclass(frozen=True)
class HomologyDegree:
    k: int
    chains: int
    kernel: int
    image: int  # dim of the image of C_{k+1} -> C_k
    homology: int
    representatives: Tuple[Dict[int, Fraction], ...]
    weights: Tuple[Tuple[int, int], ...]  # (grading eigenvalue, multiplicity) of the representatives


def chain_weight(n: int, mono, v: int) -> int:
    """Grading-element eigenvalue of xi_mono (x) e_v."""
    w = len(mono)
    w += 1 if v == 0 else (-1 if v == n + 1 else 0)
    return w


def homology(calc_or_algebra, route: str = "intrinsic") -> List[HomologyDegree]:
    algebra = getattr(calc_or_algebra, "true_algebra", calc_or_algebra)
    ch = ChainComplex(algebra)
    n = algebra.n
    mats = {k: ch.matrix(k, route) for k in range(n + 1)}
    out = []
    mono_lists = {k: list(combinations(range(1, n + 1), k)) for k in range(n + 1)}
    d = n + 2
    for k in range(n + 1):
        m = mats[k]
        ker = nullspace(m).vectors if k > 0 else [{i: Fraction(1)} for i in range(ch.dim(0))]
        img_cols = mats[k + 1].columns() if k < n else []
        red = RowReducer(ch.dim(k))
        for c in img_cols:
            red.add(c)
        im = red.rank
        # homology representatives: kernel vectors independent modulo the image,
        # chosen among weight-homogeneous combinations (the kernel basis is graded)
        reps = []
        for v in sorted(ker, key=lambda v: sorted(v)):
            if red.add(v) is not None:
                reps.append(v)
        wts: Dict[int, int] = {}
        for v in reps:
            i = min(v)
            mono = mono_lists[k][i // d]
            w = chain_weight(n, mono, i % d)
            wts[w] = wts.get(w, 0) + 1
        out.append(HomologyDegree(k, ch.dim(k), len(ker), im, len(reps), tuple(reps), tuple(sorted(wts.items()))))
    return out
