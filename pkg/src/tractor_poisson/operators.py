"""Operators on kernel forms, assembled from the structure of g/m.

Everything is held by a :class:`KernelCalculus`, built once per rank ``n``
and metric normalization.  Operators act on :class:`KernelElement` values;
:meth:`KernelCalculus.matrix` materializes any of them as an
:class:`OperatorMatrix` over the enumerated basis of a bidegree block.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Tuple

from .exact_linalg import SparseMatrix, dense_inverse, dump_matrix, rat
from .forms import (
    FormSpace,
    KernelElement,
    Monomial,
    ScalarForm,
    VectorForm,
    interior,
    merge_sign,
    wedge_scalar,
)
from .lie import (
    AlgebraModel,
    Mat,
    QuotientGM,
    StandardRep,
    _det,
    casimir_pairs,
    mat_add,
    mat_mul,
    mat_scale,
    metric_pm,
)

PLAIN = "plain"
THETA = "theta"


@dataclass(frozen=True)
class OperatorMatrix:
    name: str
    source: Tuple[int, int]
    target: Tuple[int, int]
    matrix: SparseMatrix

    def header(self, space: FormSpace) -> str:
        sp, tp = self.source, self.target
        return (
            f"# operator {self.name} n={space.n} source=({sp[0]},{sp[1]}) target=({tp[0]},{tp[1]})\n"
            "# basis index = monomial_rank * (n+2)^2 + row * (n+2) + col;"
            " monomials in lexicographic order of (E, F_1..F_n, G_1..G_n) indices\n"
        )

    def export(self, space: FormSpace) -> str:
        return self.header(space) + dump_matrix(self.matrix)


def _add_term(out: Dict[Monomial, Mat], m: Monomial, f: Mat, c=1):
    if not f or not c:
        return
    g = mat_add(out.get(m, {}), f, c)
    if g:
        out[m] = g
    else:
        out.pop(m, None)


class KernelCalculus:
    """Exterior calculus on Lambda(g/m)^* (x) End(V) for so(n+1,1).

    ``normalization`` scales the Killing form into the inner product on p/m
    (default 1/(2n), so that <E, E> = 1).  ``killing_scale`` is a test hook
    that corrupts the Killing form used by the dual-basis codifferential.
    """

    def __init__(self, n: int, normalization=None, killing_scale=1):
        self.n = n
        self.algebra = AlgebraModel(n, rat(killing_scale))
        self.true_algebra = AlgebraModel(n) if killing_scale != 1 else self.algebra
        self.quotient = QuotientGM(self.true_algebra)
        self.rep = StandardRep(self.true_algebra)
        self.space = FormSpace(n)
        self.normalization = Fraction(1, 2 * n) if normalization is None else rat(normalization)
        self.metric = metric_pm(self.true_algebra, self.normalization)
        self.metric_inv = dense_inverse(self.metric)
        self.metric_det = _det(self.metric)
        self.vdim = n + 2
        q = self.quotient
        self._reps = q.rep_mats
        self._theta_reps = tuple(self.rep.theta(x) for x in self._reps)
        self._brackets = q.bracket
        self._dscalar_cache: Dict[Monomial, Dict[Monomial, Fraction]] = {}
        self._op_cache: Dict[Tuple, OperatorMatrix] = {}

    # ------------------------------------------------------------------
    # distinguished scalar forms

    @property
    def E_star(self) -> ScalarForm:
        return ScalarForm.basis_form(self.space, 0)

    @property
    def E_flat(self) -> ScalarForm:
        """Metric dual of E restricted to the P-leg."""
        terms = {(j,): self.metric[0][j] for j in range(self.n + 1) if self.metric[0][j]}
        return ScalarForm(self.space, (1, 0), terms)

    def d_scalar(self, omega: ScalarForm) -> ScalarForm:
        """Differential of a scalar form (trivial coefficients), full bidegree."""
        out: Dict[Monomial, Fraction] = {}
        for m, c in omega.terms.items():
            for mm, x in self._d_scalar_mono(m).items():
                out[mm] = out.get(mm, 0) + c * x
        return _split_scalar(self.space, omega.degree + 1, out)

    # ------------------------------------------------------------------
    # the derivative

    def _d_scalar_mono(self, m: Monomial) -> Dict[Monomial, Fraction]:
        """-sum_{a<b} e^a ^ e^b ^ iota_{[a,b]} e^m, computed once per monomial."""
        hit = self._dscalar_cache.get(m)
        if hit is not None:
            return hit
        dim = self.quotient.dim
        out: Dict[Monomial, Fraction] = {}
        for a, b in combinations(range(dim), 2):
            br = self._brackets[a][b]
            if not br:
                continue
            for s, c in enumerate(m):
                x = br.get(c)
                if not x:
                    continue
                rest = m[:s] + m[s + 1:]
                sg, m2 = merge_sign((a, b), rest)
                if not sg:
                    continue
                coef = -x * sg * (-1 if s & 1 else 1)
                out[m2] = out.get(m2, 0) + coef
        out = {k: v for k, v in out.items() if v}
        self._dscalar_cache[m] = out
        return out

    def _rho(self, a: int, f: Mat, twist: str) -> Mat:
        x = self._reps[a]
        left = self._theta_reps[a] if twist == THETA else x
        return mat_add(mat_mul(left, f), mat_mul(f, x), -1)

    def d_full(self, phi: KernelElement, twist: str = PLAIN) -> Dict[Tuple[int, int], KernelElement]:
        """Derivative of phi, returned as its two bidegree components."""
        out: Dict[Monomial, Mat] = {}
        dim = self.quotient.dim
        for m, f in phi.terms.items():
            for a in range(dim):
                sg, m2 = merge_sign((a,), m)
                if not sg:
                    continue
                _add_term(out, m2, self._rho(a, f, twist), sg)
            for m2, c in self._d_scalar_mono(m).items():
                _add_term(out, m2, f, c)
        p, q = phi.bidegree
        parts: Dict[Tuple[int, int], Dict[Monomial, Mat]] = {(p + 1, q): {}, (p, q + 1): {}}
        for m2, f in out.items():
            parts[self.space.bidegree(m2)][m2] = f
        return {bd: KernelElement(self.space, bd, t) for bd, t in parts.items()}

    def split_bidegree(self, parts: Dict[Tuple[int, int], KernelElement], source: Tuple[int, int]):
        p, q = source
        return parts[(p + 1, q)], parts[(p, q + 1)]

    def d(self, phi, twist=PLAIN):
        return self.split_bidegree(self.d_full(phi, twist), phi.bidegree)

    def d_K(self, phi: KernelElement, lam=0) -> KernelElement:
        out = self.d_full(phi, PLAIN)[(phi.bidegree[0] + 1, phi.bidegree[1])]
        if lam:
            out = out + wedge_scalar(self.E_star, phi).scale(lam)
        return out

    def d_K_theta(self, phi: KernelElement) -> KernelElement:
        return self.d_full(phi, THETA)[(phi.bidegree[0] + 1, phi.bidegree[1])]

    def d_P(self, phi: KernelElement, twist: str = PLAIN) -> KernelElement:
        return self.d_full(phi, twist)[(phi.bidegree[0], phi.bidegree[1] + 1)]

    # ------------------------------------------------------------------
    # P-codifferential

    def rho_dual(self, x: Mat, phi: KernelElement) -> KernelElement:
        """Action on the input leg: f -> -f o X."""
        return phi.map_values(lambda f: mat_scale(mat_mul(f, x), -1))

    def P_codiff(self, phi: KernelElement) -> KernelElement:
        n = self.n
        a = self.true_algebra
        p, q = phi.bidegree
        out = KernelElement(self.space, (p, max(q - 1, 0)))
        if q == 0:
            return out
        for j in range(1, n + 1):
            xi = a.basis[a.xi(j)]
            term = interior({self.quotient.G(j): Fraction(1)}, self.rho_dual(xi, phi))
            out = out + term
        return out.scale(Fraction(-1, 2 * n))

    def P_codiff_preimage(self, phi: KernelElement) -> KernelElement:
        """Closed-form preimage under the P-codifferential.

        ``phi`` must take values in L(V_{-1}, V).  A P-leg factor is split off
        and re-attached with the sign (-1)^p.
        """
        n = self.n
        last = self.vdim - 1
        if any(c != last for f in phi.terms.values() for (_, c) in f):
            raise ValueError("values must lie in L(V_{-1}, V)")
        p, ell = phi.bidegree
        if ell > n - 1:
            raise ValueError("K-degree must be at most n-1")
        a = self.true_algebra
        dpe = self.dP_E_star()
        pieces: Dict[Monomial, Dict[Monomial, Mat]] = {}
        for m, f in phi.terms.items():
            pieces.setdefault(m[:p], {})[m[p:]] = f
        out = KernelElement(self.space, (p, ell + 1))
        coef = Fraction(2 * n, n - ell)
        for P, qterms in sorted(pieces.items()):
            psi = KernelElement(self.space, (0, ell), qterms)
            pre = KernelElement(self.space, (0, ell + 1))
            for i in range(1, n + 1):
                left = interior({self.quotient.F(i): Fraction(1)}, dpe)
                pre = pre + wedge_scalar(left, self.rho_dual(a.basis[a.eta(i)], psi))
            lead = ScalarForm(self.space, (p, 0), {P: Fraction(1)})
            out = out + wedge_scalar(lead, pre).scale(coef * (-1 if p & 1 else 1))
        return out

    def dP_E_star(self) -> ScalarForm:
        return _split_scalar(self.space, 2, {m: c for m, c in self._d_scalar_mono((0,)).items()})[(1, 1)]

    # ------------------------------------------------------------------
    # Hodge star on the P-leg

    @lru_cache(maxsize=None)
    def _star_table(self, p: int) -> Dict[Monomial, Dict[Monomial, Fraction]]:
        N = self.n + 1
        ginv = self.metric_inv
        full = tuple(range(N))
        table: Dict[Monomial, Dict[Monomial, Fraction]] = {}
        subsets = list(combinations(full, p))
        for I in subsets:
            img: Dict[Monomial, Fraction] = {}
            for J in subsets:
                g = _det([[ginv[i][j] for j in J] for i in I]) if p else Fraction(1)
                if not g:
                    continue
                Jc = tuple(i for i in full if i not in J)
                s, _ = merge_sign(J, Jc)
                img[Jc] = g * s
            table[I] = img
        return table

    def hodge_K(self, phi):
        """Star on the P-leg: alpha ^ *beta = <alpha, beta> E* ^ F*_1 ^ ... ^ F*_n."""
        p, q = phi.bidegree
        table = self._star_table(p)
        out: Dict[Monomial, object] = {}
        for m, f in phi.terms.items():
            P, Q = m[:p], m[p:]
            for Jc, c in table[P].items():
                mm = Jc + Q
                if isinstance(f, dict):
                    _add_term(out, mm, f, c)
                else:
                    out[mm] = out.get(mm, 0) + c * f
        return phi._new((self.n + 1 - p, q), out)

    def hodge_K_inv(self, phi):
        p = phi.bidegree[0]
        r = self.n + 1 - p
        c = self.metric_det * (-1 if (p * r) & 1 else 1)
        return self.hodge_K(phi).scale(c)

    # ------------------------------------------------------------------
    # K-codifferential, Laplacian, Lie derivatives

    def delta_K(self, phi: KernelElement, lam=0) -> KernelElement:
        p, q = phi.bidegree
        if p == 0:
            return KernelElement(self.space, (0, q))
        out = self.hodge_K_inv(self.d_K_theta(self.hodge_K(phi)))
        if p & 1:
            out = -out
        if lam:
            out = out - interior({0: Fraction(1)}, phi).scale(lam)
        return out

    def laplace_K(self, phi: KernelElement, lam=0) -> KernelElement:
        p, q = phi.bidegree
        out = self.d_K(self.delta_K(phi, lam), lam) if p > 0 else KernelElement(self.space, (p, q))
        if p < self.n + 1:
            out = out + self.delta_K(self.d_K(phi, lam), lam)
        return out

    def lie_E(self, phi: KernelElement, twist: str = PLAIN) -> KernelElement:
        dk = self.d_K_theta if twist == THETA else self.d_K
        e = {0: Fraction(1)}
        p, q = phi.bidegree
        out = KernelElement(self.space, phi.bidegree)
        if p < self.n + 1:
            out = out + interior(e, dk(phi))
        if p > 0:
            out = out + dk(interior(e, phi))
        return out

    def lie_E_star(self, phi: KernelElement) -> KernelElement:
        flat = self.E_flat
        p, q = phi.bidegree
        out = KernelElement(self.space, phi.bidegree)
        if p > 0:
            out = out + wedge_scalar(flat, self.delta_K(phi))
        if p < self.n + 1:
            out = out + self.delta_K(wedge_scalar(flat, phi))
        return out

    def lie_ops(self, phi: KernelElement):
        return self.lie_E(phi), self.lie_E(phi, THETA), self.lie_E_star(phi)

    def rho_value(self, x: Mat, phi: KernelElement, twist: str = PLAIN) -> KernelElement:
        left = self.rep.theta(x) if twist == THETA else x
        return phi.map_values(lambda f: mat_add(mat_mul(left, f), mat_mul(f, x), -1))

    # ------------------------------------------------------------------
    # Casimir

    @lru_cache(maxsize=None)
    def casimir(self) -> Tuple[Mat, Mat]:
        a = self.true_algebra
        pairs = casimir_pairs(a)
        out_leg: Mat = {}
        in_leg: Mat = {}
        for b, bd in pairs:
            x, y = a.element(b), a.element(bd)
            out_leg = mat_add(out_leg, mat_mul(x, y))
            in_leg = mat_add(in_leg, mat_mul(y, x))
        return out_leg, in_leg

    def tau_casimir(self, phi: KernelElement, leg: str = "output") -> KernelElement:
        c_out, c_in = self.casimir()
        if leg == "output":
            return phi.map_values(lambda f: mat_mul(c_out, f))
        if leg == "input":
            return phi.map_values(lambda f: mat_mul(f, c_in))
        raise ValueError("leg must be 'output' or 'input'")

    # ------------------------------------------------------------------
    # matrices

    def operator(self, name: str) -> Tuple[Callable, Callable]:
        """(function, target-bidegree rule) for a named operator."""
        n = self.n
        table = {
            "d_K": (self.d_K, lambda p, q: (p + 1, q)),
            "d_K_theta": (self.d_K_theta, lambda p, q: (p + 1, q)),
            "d_P": (self.d_P, lambda p, q: (p, q + 1)),
            "P_codiff": (self.P_codiff, lambda p, q: (p, q - 1)),
            "hodge_K": (self.hodge_K, lambda p, q: (n + 1 - p, q)),
            "delta_K": (self.delta_K, lambda p, q: (p - 1, q)),
            "laplace_K": (self.laplace_K, lambda p, q: (p, q)),
            "lie_E": (self.lie_E, lambda p, q: (p, q)),
            "lie_E_theta": (lambda f: self.lie_E(f, THETA), lambda p, q: (p, q)),
            "lie_E_star": (self.lie_E_star, lambda p, q: (p, q)),
            "tau_casimir": (self.tau_casimir, lambda p, q: (p, q)),
        }
        if name not in table:
            raise KeyError(f"unknown operator {name!r}; known: {', '.join(sorted(table))}")
        return table[name]

    def matrix(self, name: str, p: int, q: int) -> OperatorMatrix:
        key = (name, p, q)
        if key in self._op_cache:
            return self._op_cache[key]
        fn, rule = self.operator(name)
        tp, tq = rule(p, q)
        sp = self.space
        if not (0 <= tp <= self.n + 1 and 0 <= tq <= self.n):
            raise ValueError(f"{name} maps bidegree ({p},{q}) outside the form space")
        cols = []
        for i in range(sp.kernel_dim(p, q)):
            img = fn(KernelElement.basis_element(sp, (p, q), i))
            cols.append(img.to_vector() if img.bidegree == (tp, tq) else {})
        m = SparseMatrix.from_columns(sp.kernel_dim(tp, tq), cols)
        op = OperatorMatrix(name, (p, q), (tp, tq), m)
        self._op_cache[key] = op
        return op

    def apply_matrix(self, op: OperatorMatrix, phi: KernelElement) -> KernelElement:
        return KernelElement.from_vector(self.space, op.target, op.matrix.apply(phi.to_vector()))


def _split_scalar(space: FormSpace, degree: int, terms: Dict[Monomial, Fraction]) -> Dict[Tuple[int, int], ScalarForm]:
    parts: Dict[Tuple[int, int], Dict[Monomial, Fraction]] = {}
    for p in range(degree + 1):
        parts[(p, degree - p)] = {}
    for m, c in terms.items():
        if c:
            parts[space.bidegree(m)][m] = c
    return {bd: ScalarForm(space, bd, t) for bd, t in parts.items()}


# ---------------------------------------------------------------------------
# Kostant codifferential on chains Lambda^k p_+ (x) V


class ChainComplex:
    """Chains on p_+ = g_1 with values in V or V*.

    Monomials are increasing tuples over 1..n (xi_1..xi_n).  A lightweight
    :class:`FormSpace`-compatible index space is used for bidegree bookkeeping,
    with every index on the P-leg.
    """

    def __init__(self, algebra: AlgebraModel):
        self.algebra = algebra
        self.n = algebra.n
        self.vdim = algebra.n + 2
        self.space = _ChainSpace(self.n)

    def basis(self, k: int, dual: bool = False) -> List[VectorForm]:
        out = []
        for m in combinations(range(1, self.n + 1), k):
            for v in range(self.vdim):
                out.append(VectorForm(self.space, (k, 0), {m: {v: Fraction(1)}}, dual))
        return out

    def dim(self, k: int) -> int:
        from math import comb

        return comb(self.n, k) * self.vdim

    def _act(self, i: int, vec: Dict[int, Fraction], dual: bool) -> Dict[int, Fraction]:
        x = self.algebra.basis[self.algebra.xi(i)]
        out: Dict[int, Fraction] = {}
        if dual:
            # (Z.w)(v) = -w(Z v): (Z.w)_c = -sum_r w_r Z_{rc}
            for (r, c), z in x.items():
                if r in vec:
                    out[c] = out.get(c, 0) - vec[r] * z
        else:
            for (r, c), z in x.items():
                if c in vec:
                    out[r] = out.get(r, 0) + z * vec[c]
        return {k: v for k, v in out.items() if v}

    def codiff_intrinsic(self, psi: VectorForm) -> VectorForm:
        """sum_i (-1)^(i+1) Z_1 ^ .. ^ Z_i-hat ^ .. ^ Z_k (x) Z_i . v (p_+ is abelian)."""
        k = psi.bidegree[0]
        out: Dict[Monomial, Dict[int, Fraction]] = {}
        for m, v in psi.terms.items():
            for s, i in enumerate(m):
                w = self._act(i, v, psi.dual)
                if not w:
                    continue
                rest = m[:s] + m[s + 1:]
                c = 1 if s % 2 == 0 else -1
                acc = dict(out.get(rest, {}))
                for key, x in w.items():
                    acc[key] = acc.get(key, 0) + c * x
                out[rest] = {a: b for a, b in acc.items() if b}
        return VectorForm(self.space, (max(k - 1, 0), 0), {m: v for m, v in out.items() if v}, psi.dual)

    def codiff_dual_basis(self, psi: VectorForm) -> VectorForm:
        """-(1/2n) sum_j rho(xi_j) iota(eta_j) psi, iota through the Killing pairing."""
        a = self.algebra
        n = self.n
        k = psi.bidegree[0]
        out: Dict[Monomial, Dict[int, Fraction]] = {}
        for j in range(1, n + 1):
            pair = {i: a.killing[a.xi(i)][a.eta(j)] for i in range(1, n + 1)}
            for m, v in psi.terms.items():
                for s, i in enumerate(m):
                    c = pair[i]
                    if not c:
                        continue
                    rest = m[:s] + m[s + 1:]
                    w = self._act(j, v, psi.dual)
                    sgn = -1 if s & 1 else 1
                    acc = dict(out.get(rest, {}))
                    for key, x in w.items():
                        acc[key] = acc.get(key, 0) + sgn * c * x * Fraction(-1, 2 * n)
                    out[rest] = {a_: b for a_, b in acc.items() if b}
        return VectorForm(self.space, (max(k - 1, 0), 0), {m: v for m, v in out.items() if v}, psi.dual)

    def matrix(self, k: int, route: str = "intrinsic", dual: bool = False) -> SparseMatrix:
        fn = self.codiff_intrinsic if route == "intrinsic" else self.codiff_dual_basis
        rows = self.dim(k - 1) if k > 0 else 0
        index = {m: r for r, m in enumerate(combinations(range(1, self.n + 1), max(k - 1, 0)))}
        cols = []
        for b in self.basis(k, dual):
            img = fn(b) if k > 0 else None
            col = {}
            if img is not None:
                for m, v in img.terms.items():
                    for i, x in v.items():
                        col[index[m] * self.vdim + i] = x
            cols.append(col)
        return SparseMatrix.from_columns(rows, cols)


class _ChainSpace(FormSpace):
    """Index space for chains: indices 1..n all counted on the first leg."""

    def __init__(self, n: int):
        self.n = n
        self.gm_dim = n
        self.vdim = n + 2
        self.p_indices = tuple(range(1, n + 1))
        self.q_indices = ()
        self.volume = self.p_indices

    def bidegree(self, mono):
        return len(mono), 0
