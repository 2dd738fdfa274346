"""Matrix model of so(n+1,1), its |1|-grading and the standard representation.

The form matrix is ``S = [[0,0,1],[0,I_n,0],[1,0,0]]`` and a Lie algebra
element with blocks ``a, X, Y, B`` is::

    [[ a, -Y^t,  0],
     [ X,   B,   Y],
     [ 0, -X^t, -a]]

``X`` spans g_{-1} (the ``eta`` elements), ``Y`` spans g_1 (``xi``), ``a``
spans the grading element and ``B`` the compact part m = so(n).

Index conventions on V = R^{n+2}: 0 is e_1 (V_1), 1..n are V_0 and n+1 is
e_{n+2} (V_{-1}).  On the quotient g/m the basis is ordered as
``E, F_1..F_n, G_1..G_n``; the first n+1 vectors span p/m (the "P-leg" of a
form) and the last n span k/m (the "K-leg" in the sense of fibre directions
of G/M -> G/K).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

from .exact_linalg import dense_inverse, rat

Mat = Dict[Tuple[int, int], Fraction]  # sparse square matrix on V
Coords = Dict[int, Fraction]  # sparse coordinates in some basis


# ---------------------------------------------------------------------------
# small sparse matrices on V


def mat_mul(a: Mat, b: Mat) -> Mat:
    by_row: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (k, c), y in b.items():
        by_row.setdefault(k, []).append((c, y))
    out: Dict[Tuple[int, int], Fraction] = {}
    for (r, k), x in a.items():
        for c, y in by_row.get(k, ()):
            out[(r, c)] = out.get((r, c), 0) + x * y
    return {rc: v for rc, v in out.items() if v}


def mat_add(a: Mat, b: Mat, c=1) -> Mat:
    out = dict(a)
    for rc, y in b.items():
        z = out.get(rc, 0) + c * y
        if z:
            out[rc] = z
        else:
            out.pop(rc, None)
    return out


def mat_scale(a: Mat, c) -> Mat:
    if not c:
        return {}
    return {rc: c * x for rc, x in a.items()}


def mat_transpose(a: Mat) -> Mat:
    return {(c, r): x for (r, c), x in a.items()}


def mat_commutator(a: Mat, b: Mat) -> Mat:
    return mat_add(mat_mul(a, b), mat_mul(b, a), -1)


def mat_trace(a: Mat) -> Fraction:
    return sum((x for (r, c), x in a.items() if r == c), Fraction(0))


def mat_identity(d: int) -> Mat:
    return {(i, i): Fraction(1) for i in range(d)}


def unit(r: int, c: int) -> Mat:
    return {(r, c): Fraction(1)}


# ---------------------------------------------------------------------------
# the algebra


@dataclass(frozen=True)
class BasisLabel:
    name: str
    grade: int
    in_m: bool
    in_k: bool
    in_p: bool


@dataclass(frozen=True, eq=False)
class AlgebraModel:
    """so(n+1,1) in the fixed ordered basis (eta_1..eta_n, m_ij, E~, xi_1..xi_n).

    ``killing_scale`` multiplies the Killing form everywhere it is used; it is
    1 for the genuine algebra and exists only so that tests can inject a
    wrong normalization.
    """

    n: int
    killing_scale: Fraction = Fraction(1)
    basis: Tuple[Mat, ...] = field(init=False, repr=False)
    labels: Tuple[BasisLabel, ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise ValueError("n must be at least 2")
        N = n + 1
        basis: List[Mat] = []
        labels: List[BasisLabel] = []
        for i in range(1, n + 1):
            basis.append({(i, 0): Fraction(1), (N, i): Fraction(-1)})
            labels.append(BasisLabel(f"eta_{i}", -1, False, False, False))
        for i, j in combinations(range(1, n + 1), 2):
            basis.append({(i, j): Fraction(1), (j, i): Fraction(-1)})
            labels.append(BasisLabel(f"m_{i}{j}", 0, True, True, True))
        basis.append({(0, 0): Fraction(1), (N, N): Fraction(-1)})
        labels.append(BasisLabel("E~", 0, False, False, True))
        for i in range(1, n + 1):
            basis.append({(0, i): Fraction(-1), (i, N): Fraction(1)})
            labels.append(BasisLabel(f"xi_{i}", 1, False, False, True))
        object.__setattr__(self, "basis", tuple(basis))
        object.__setattr__(self, "labels", tuple(labels))

    # -- index bookkeeping ------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def vdim(self) -> int:
        return self.n + 2

    def eta(self, i: int) -> int:
        """Basis index of eta_{e_i}, 1-based i."""
        return i - 1

    def xi(self, i: int) -> int:
        return self.dim - self.n + i - 1

    @property
    def grading(self) -> int:
        return self.dim - self.n - 1

    @cached_property
    def m_indices(self) -> Tuple[int, ...]:
        return tuple(a for a, lab in enumerate(self.labels) if lab.in_m)

    @cached_property
    def m_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(combinations(range(1, self.n + 1), 2))

    def m_index(self, i: int, j: int) -> int:
        return self.n + self.m_pairs.index((i, j))

    def m_generators(self) -> Tuple[int, ...]:
        """m_{i,i+1}: these generate so(n) as a Lie algebra."""
        return tuple(self.m_index(i, i + 1) for i in range(1, self.n))

    def grade_indices(self, g: int) -> Tuple[int, ...]:
        return tuple(a for a, lab in enumerate(self.labels) if lab.grade == g)

    # -- coordinates --------------------------------------------------------

    def coords(self, x: Mat) -> Coords:
        """Coordinates of a matrix in the basis; raises if x is not in g."""
        n, N = self.n, self.n + 1
        out: Coords = {}
        for i in range(1, n + 1):
            if x.get((i, 0)):
                out[self.eta(i)] = x[(i, 0)]
            if x.get((i, N)):
                out[self.xi(i)] = x[(i, N)]
        for i, j in self.m_pairs:
            if x.get((i, j)):
                out[self.m_index(i, j)] = x[(i, j)]
        if x.get((0, 0)):
            out[self.grading] = x[(0, 0)]
        if self.element(out) != {rc: v for rc, v in x.items() if v}:
            raise ValueError("matrix is not in so(n+1,1)")
        return out

    def element(self, c: Coords) -> Mat:
        out: Mat = {}
        for a, x in c.items():
            out = mat_add(out, self.basis[a], x)
        return out

    def bracket_coords(self, u: Coords, v: Coords) -> Coords:
        return self.coords(mat_commutator(self.element(u), self.element(v)))

    @cached_property
    def bracket_table(self) -> Tuple[Tuple[Coords, ...], ...]:
        """bracket_table[a][b] = coordinates of [b_a, b_b]."""
        d = self.dim
        return tuple(
            tuple(self.coords(mat_commutator(self.basis[a], self.basis[b])) for b in range(d)) for a in range(d)
        )

    @cached_property
    def ad(self) -> Tuple[Dict[Tuple[int, int], Fraction], ...]:
        """ad(b_a) as a sparse dim x dim matrix (row = output coordinate)."""
        out = []
        for a in range(self.dim):
            m: Dict[Tuple[int, int], Fraction] = {}
            for b in range(self.dim):
                for c, x in self.bracket_table[a][b].items():
                    m[(c, b)] = x
            out.append(m)
        return tuple(out)

    @cached_property
    def killing(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """Gram matrix tr(ad b_a ad b_b), times ``killing_scale``."""
        d = self.dim
        g = [[Fraction(0)] * d for _ in range(d)]
        for a in range(d):
            for b in range(a, d):
                t = mat_trace(mat_mul(self.ad[a], self.ad[b])) * self.killing_scale
                g[a][b] = g[b][a] = t
        return tuple(tuple(r) for r in g)

    def killing_form(self, u: Coords, v: Coords) -> Fraction:
        return sum((x * y * self.killing[a][b] for a, x in u.items() for b, y in v.items()), Fraction(0))

    def theta(self, x: Mat) -> Mat:
        """Cartan involution X -> -X^t."""
        return mat_scale(mat_transpose(x), -1)

    def theta_coords(self, c: Coords) -> Coords:
        return self.coords(self.theta(self.element(c)))

    def with_killing_scale(self, c) -> "AlgebraModel":
        return AlgebraModel(self.n, rat(c))


def build_algebra(n: int) -> AlgebraModel:
    return AlgebraModel(n)


# ---------------------------------------------------------------------------
# dual bases and Casimir


def killing_dual_bases(a: AlgebraModel) -> List[Tuple[Coords, Coords]]:
    """Pairs (xi_j, eta^_j) with B(xi_j, eta^_k) = delta_jk, eta^_j in g_{-1}."""
    n = a.n
    gram = [[a.killing[a.xi(j)][a.eta(k)] for k in range(1, n + 1)] for j in range(1, n + 1)]
    inv = dense_inverse(gram)
    pairs = []
    for j in range(n):
        # eta^_j = sum_k c_k eta_k with  sum_k gram[i][k] c_k = delta_ij
        eta_hat = {a.eta(k + 1): inv[k][j] for k in range(n) if inv[k][j]}
        pairs.append(({a.xi(j + 1): Fraction(1)}, eta_hat))
    return pairs


def casimir_pairs(a: AlgebraModel, order: Sequence[int] = ()) -> List[Tuple[Coords, Coords]]:
    """B-dual bases (b_i, b^i) of g.  ``order`` optionally permutes the b_i."""
    d = a.dim
    idx = list(order) if order else list(range(d))
    gram = [[a.killing[i][j] for j in idx] for i in idx]
    inv = dense_inverse(gram)
    pairs = []
    for s, i in enumerate(idx):
        dual = {idx[t]: inv[t][s] for t in range(d) if inv[t][s]}
        pairs.append(({i: Fraction(1)}, dual))
    return pairs


def casimir_matrix(a: AlgebraModel, order: Sequence[int] = ()) -> Mat:
    """sum_i rho(b_i) rho(b^i) on the standard representation."""
    out: Mat = {}
    for b, bd in casimir_pairs(a, order):
        out = mat_add(out, mat_mul(a.element(b), a.element(bd)))
    return out


# ---------------------------------------------------------------------------
# the quotient g/m


@dataclass(frozen=True, eq=False)
class QuotientGM:
    """g/m with basis E, F_1..F_n, G_1..G_n (indices 0, 1..n, n+1..2n)."""

    algebra: AlgebraModel

    @property
    def n(self) -> int:
        return self.algebra.n

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def p_dim(self) -> int:
        return self.n + 1

    def E(self) -> int:
        return 0

    def F(self, i: int) -> int:
        return i

    def G(self, j: int) -> int:
        return self.n + j

    def is_p(self, idx: int) -> bool:
        return idx <= self.n

    def label(self, idx: int) -> str:
        if idx == 0:
            return "E"
        if idx <= self.n:
            return f"F{idx}"
        return f"G{idx - self.n}"

    def project(self, x: Coords) -> Coords:
        """(X, a, Y) -> G: X, E: a, F: Y - X; the so(n) part is dropped."""
        a = self.algebra
        n = self.n
        out: Coords = {}
        ecoord = x.get(a.grading, 0)
        if ecoord:
            out[0] = Fraction(ecoord)
        for i in range(1, n + 1):
            X = x.get(a.eta(i), 0)
            Y = x.get(a.xi(i), 0)
            if Y - X:
                out[self.F(i)] = Fraction(Y - X)
            if X:
                out[self.G(i)] = Fraction(X)
        return out

    def representative(self, v: Coords) -> Coords:
        """Canonical representative in g with zero so(n) part."""
        a = self.algebra
        n = self.n
        out: Coords = {}
        if v.get(0):
            out[a.grading] = v[0]
        for i in range(1, n + 1):
            f = v.get(self.F(i), 0)
            g = v.get(self.G(i), 0)
            if g:
                out[a.eta(i)] = g
            if f + g:
                out[a.xi(i)] = f + g
        return out

    @cached_property
    def rep_coords(self) -> Tuple[Coords, ...]:
        return tuple(self.representative({i: Fraction(1)}) for i in range(self.dim))

    @cached_property
    def rep_mats(self) -> Tuple[Mat, ...]:
        return tuple(self.algebra.element(c) for c in self.rep_coords)

    @cached_property
    def bracket(self) -> Tuple[Tuple[Coords, ...], ...]:
        """bracket[i][j] = [rep_i, rep_j] + m in quotient coordinates."""
        a = self.algebra
        return tuple(
            tuple(self.project(a.bracket_coords(self.rep_coords[i], self.rep_coords[j])) for j in range(self.dim))
            for i in range(self.dim)
        )

    @cached_property
    def m_action(self) -> Tuple[Tuple[Coords, ...], ...]:
        """m_action[g][i] = [m_g, basis_i] + m for the so(n) generators."""
        a = self.algebra
        return tuple(
            tuple(self.project(a.bracket_coords({mi: Fraction(1)}, self.rep_coords[i])) for i in range(self.dim))
            for mi in a.m_indices
        )


def project_gm(a: AlgebraModel, x: Coords) -> Coords:
    return QuotientGM(a).project(x)


def metric_pm(a: AlgebraModel, normalization=None) -> List[List[Fraction]]:
    """Inner product on p/m: normalization * B(q(u), q(v)), q(x) = (x - theta x)/2.

    The default normalization 1/(2n) makes <E, E> = 1.
    """
    kappa = Fraction(1, 2 * a.n) if normalization is None else rat(normalization)
    if kappa <= 0:
        raise ValueError("normalization must be positive")
    q = QuotientGM(a)
    reps = []
    for i in range(q.p_dim):
        c = q.rep_coords[i]
        t = a.theta_coords(c)
        keys = set(c) | set(t)
        reps.append({k: (c.get(k, 0) - t.get(k, 0)) / 2 for k in keys if c.get(k, 0) != t.get(k, 0)})
    g = [[kappa * a.killing_form(u, v) for v in reps] for u in reps]
    # positive definiteness through leading principal minors
    for k in range(1, len(g) + 1):
        if _det([row[:k] for row in g[:k]]) <= 0:
            raise ArithmeticError("metric on p/m is not positive definite")
    return g


def _det(m: List[List[Fraction]]) -> Fraction:
    m = [list(r) for r in m]
    d = len(m)
    det = Fraction(1)
    for c in range(d):
        piv = next((r for r in range(c, d) if m[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, d):
            if m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


# ---------------------------------------------------------------------------
# the standard representation


@dataclass(frozen=True, eq=False)
class StandardRep:
    """V = R^{n+2} with its M-splitting and the g-actions on End(V)."""

    algebra: AlgebraModel

    @property
    def dim(self) -> int:
        return self.algebra.n + 2

    @cached_property
    def S(self) -> Mat:
        N = self.dim - 1
        s = {(0, N): Fraction(1), (N, 0): Fraction(1)}
        for i in range(1, N):
            s[(i, i)] = Fraction(1)
        return s

    @cached_property
    def euclid(self) -> Mat:
        return mat_identity(self.dim)

    def grade_of(self, idx: int) -> int:
        """Grading-element eigenvalue of the basis vector idx."""
        if idx == 0:
            return 1
        if idx == self.dim - 1:
            return -1
        return 0

    def indices(self, j: int) -> Tuple[int, ...]:
        return tuple(i for i in range(self.dim) if self.grade_of(i) == j)

    def projector(self, j: int) -> Mat:
        return {(i, i): Fraction(1) for i in self.indices(j)}

    @cached_property
    def vt_normal(self) -> Dict[int, Fraction]:
        """Row functional v -> v_1 - v_{n+2}; V_T is its kernel."""
        return {0: Fraction(1), self.dim - 1: Fraction(-1)}

    def theta(self, x: Mat) -> Mat:
        return self.algebra.theta(x)

    # actions on End(V); X is a matrix on V, f an endomorphism
    def rho(self, x: Mat, f: Mat) -> Mat:
        return mat_add(mat_mul(x, f), mat_mul(f, x), -1)

    def rho_theta(self, x: Mat, f: Mat) -> Mat:
        return mat_add(mat_mul(self.theta(x), f), mat_mul(f, x), -1)

    def rho_dual(self, x: Mat, f: Mat) -> Mat:
        """Action on the input (V*) leg only: f -> -f o X."""
        return mat_scale(mat_mul(f, x), -1)


def rep_actions(a: AlgebraModel) -> StandardRep:
    return StandardRep(a)
