"""Bigraded exterior algebra over (g/m)^* and the kernel spaces built on it.

A monomial is a strictly increasing tuple of quotient indices (see
:class:`tractor_poisson.lie.QuotientGM`); since every P-leg index
(E, F_i) is smaller than every K-leg index (G_j), the P-leg always comes
first and wedging a (p, q)-monomial with a (p', q')-monomial costs the sign
(-1)^(q p').  Forms are evaluated with the determinant convention
``(a^1 ^ ... ^ a^k)(v_1, ..., v_k) = det(a^i(v_j))``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .exact_linalg import rat
from .lie import Mat, mat_add, mat_mul, mat_scale

Monomial = Tuple[int, ...]


def merge_sign(a: Monomial, b: Monomial) -> Tuple[int, Optional[Monomial]]:
    """Sign and sorted union of two increasing tuples; (0, None) if they meet."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sa = set(a)
    if any(x in sa for x in b):
        return 0, None
    inv = 0
    for y in b:
        for x in a:
            if x > y:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


class FormSpace:
    """Index bookkeeping for Lambda^{p,q}(g/m)^* with n = rank parameter."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("n must be at least 2")
        self.n = n
        self.gm_dim = 2 * n + 1
        self.vdim = n + 2
        self.p_indices = tuple(range(n + 1))
        self.q_indices = tuple(range(n + 1, 2 * n + 1))
        self.volume: Monomial = self.p_indices

    def bidegree(self, mono: Monomial) -> Tuple[int, int]:
        p = sum(1 for i in mono if i <= self.n)
        return p, len(mono) - p

    @lru_cache(maxsize=None)
    def monomials(self, p: int, q: int) -> Tuple[Monomial, ...]:
        if not (0 <= p <= self.n + 1 and 0 <= q <= self.n):
            return ()
        return tuple(P + Q for P in combinations(self.p_indices, p) for Q in combinations(self.q_indices, q))

    @lru_cache(maxsize=None)
    def mono_index(self, p: int, q: int) -> Dict[Monomial, int]:
        return {m: i for i, m in enumerate(self.monomials(p, q))}

    def dim(self, p: int, q: int, values: int = 1) -> int:
        return len(self.monomials(p, q)) * values

    def kernel_dim(self, p: int, q: int) -> int:
        return self.dim(p, q, self.vdim ** 2)

    def label(self, mono: Monomial) -> str:
        def one(i):
            if i == 0:
                return "E*"
            if i <= self.n:
                return f"F*{i}"
            return f"G*{i - self.n}"

        return "^".join(one(i) for i in mono) or "1"


# ---------------------------------------------------------------------------
# value types


def _is_zero(v) -> bool:
    if isinstance(v, dict):
        return not v
    return v == 0


def _add(u, v, c=1):
    if isinstance(u, dict):
        return mat_add(u, v, c)
    return u + c * v


def _scale(v, c):
    if isinstance(v, dict):
        return mat_scale(v, c)
    return v * c


class _Form:
    """Sparse map monomial -> value for a single bidegree."""

    __slots__ = ("space", "bidegree", "terms")
    _zero: object = None

    def __init__(self, space: FormSpace, bidegree: Tuple[int, int], terms: Optional[Mapping[Monomial, object]] = None):
        self.space = space
        self.bidegree = tuple(bidegree)
        clean = {}
        for m, v in (terms or {}).items():
            if _is_zero(v):
                continue
            if space.bidegree(m) != self.bidegree:
                raise ValueError(f"monomial {m} does not have bidegree {bidegree}")
            clean[tuple(m)] = v
        self.terms: Dict[Monomial, object] = clean

    @property
    def degree(self) -> int:
        return self.bidegree[0] + self.bidegree[1]

    def _new(self, bidegree, terms):
        return type(self)(self.space, bidegree, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if other.bidegree != self.bidegree:
            raise ValueError("cannot add forms of different bidegree")
        out = dict(self.terms)
        for m, v in other.terms.items():
            out[m] = _add(out[m], v) if m in out else v
        return self._new(self.bidegree, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = rat(c)
        if not c:
            return self._new(self.bidegree, {})
        return self._new(self.bidegree, {m: _scale(v, c) for m, v in self.terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, _Form):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.bidegree == other.bidegree and self.terms == other.terms

    def __repr__(self):
        return f"{type(self).__name__}(bidegree={self.bidegree}, terms={len(self.terms)})"


class ScalarForm(_Form):
    """Real-valued form; acts on End(V)-valued forms as a multiple of the identity."""

    __slots__ = ()

    @classmethod
    def unit(cls, space: FormSpace) -> "ScalarForm":
        return cls(space, (0, 0), {(): Fraction(1)})

    @classmethod
    def basis_form(cls, space: FormSpace, idx: int) -> "ScalarForm":
        return cls(space, space.bidegree((idx,)), {(idx,): Fraction(1)})

    def __getitem__(self, mono: Monomial) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))


class KernelElement(_Form):
    """End(V)-valued form of one bidegree; values are sparse (n+2)x(n+2) matrices."""

    __slots__ = ()

    @classmethod
    def constant(cls, space: FormSpace, f: Mat) -> "KernelElement":
        return cls(space, (0, 0), {(): dict(f)})

    def value(self, mono: Monomial) -> Mat:
        return self.terms.get(tuple(mono), {})

    def map_values(self, fn) -> "KernelElement":
        return self._new(self.bidegree, {m: fn(v) for m, v in self.terms.items()})

    # flattening to coordinate vectors of the enumerated basis
    def to_vector(self) -> Dict[int, Fraction]:
        p, q = self.bidegree
        d = self.space.vdim
        idx = self.space.mono_index(p, q)
        out = {}
        for m, v in self.terms.items():
            base = idx[m] * d * d
            for (r, c), x in v.items():
                out[base + r * d + c] = x
        return out

    @classmethod
    def from_vector(cls, space: FormSpace, bidegree, vec: Mapping[int, object]) -> "KernelElement":
        p, q = bidegree
        d = space.vdim
        monos = space.monomials(p, q)
        terms: Dict[Monomial, Mat] = {}
        for i, x in vec.items():
            x = rat(x)
            if not x:
                continue
            mi, rc = divmod(i, d * d)
            r, c = divmod(rc, d)
            terms.setdefault(monos[mi], {})[(r, c)] = x
        return cls(space, bidegree, terms)

    @classmethod
    def basis_element(cls, space: FormSpace, bidegree, i: int) -> "KernelElement":
        return cls.from_vector(space, bidegree, {i: 1})

    def first_difference(self, other: "KernelElement"):
        """First (monomial, (r, c), left, right) where self and other differ, else None."""
        diff = (self - other) if self.bidegree == other.bidegree else None
        keys: Iterable[Monomial]
        if diff is None:
            keys = sorted(set(self.terms) | set(other.terms))
        else:
            keys = sorted(diff.terms)
        for m in keys:
            a, b = self.value(m), other.value(m)
            for rc in sorted(set(a) | set(b)):
                if a.get(rc, 0) != b.get(rc, 0):
                    return m, rc, Fraction(a.get(rc, 0)), Fraction(b.get(rc, 0))
        return None


class VectorForm(_Form):
    """Form with values in V (``dual=False``) or V* (``dual=True``), values sparse dicts."""

    __slots__ = ("dual",)

    def __init__(self, space, bidegree, terms=None, dual: bool = False):
        self.dual = dual
        super().__init__(space, bidegree, terms)

    def _new(self, bidegree, terms):
        return VectorForm(self.space, bidegree, terms, self.dual)


# ---------------------------------------------------------------------------
# products


def _wedge_terms(a_terms, b_terms, mul):
    out: Dict[Monomial, object] = {}
    for ma, va in a_terms.items():
        for mb, vb in b_terms.items():
            s, m = merge_sign(ma, mb)
            if not s:
                continue
            v = mul(va, vb, s)
            if _is_zero(v):
                continue
            out[m] = _add(out[m], v) if m in out else v
    return {m: v for m, v in out.items() if not _is_zero(v)}


def wedge(a: ScalarForm, b: ScalarForm) -> ScalarForm:
    bd = (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1])
    return ScalarForm(a.space, bd, _wedge_terms(a.terms, b.terms, lambda x, y, s: s * x * y))


def wedge_scalar(omega: ScalarForm, phi: _Form) -> _Form:
    """omega ^ phi for a scalar form omega and any valued form phi."""
    if isinstance(phi, ScalarForm):
        return wedge(omega, phi)
    bd = (omega.bidegree[0] + phi.bidegree[0], omega.bidegree[1] + phi.bidegree[1])
    terms = _wedge_terms(omega.terms, phi.terms, lambda x, v, s: _scale(v, s * x))
    return phi._new(bd, terms)


def wedge_scalar_right(phi: _Form, omega: ScalarForm) -> _Form:
    """phi ^ omega with the scalar factor on the right."""
    bd = (omega.bidegree[0] + phi.bidegree[0], omega.bidegree[1] + phi.bidegree[1])
    terms = _wedge_terms(phi.terms, omega.terms, lambda v, x, s: _scale(v, s * x))
    return phi._new(bd, terms)


def wedge_power(omega: ScalarForm, m: int) -> ScalarForm:
    if m < 0:
        raise ValueError("negative power")
    out = ScalarForm.unit(omega.space)
    for _ in range(m):
        out = wedge(out, omega)
    return out


def interior(v: Mapping[int, object], phi: _Form) -> _Form:
    """Contraction with a quotient vector (coordinates in the E, F, G basis).

    ``v`` must lie in one leg so that the result has a single bidegree.
    """
    legs = {phi.space.bidegree((i,)) for i, x in v.items() if x}
    if not legs:
        return phi._new(phi.bidegree, {})
    if len(legs) > 1:
        raise ValueError("interior product with a vector mixing both legs")
    (dp, dq), = legs
    bd = (phi.bidegree[0] - dp, phi.bidegree[1] - dq)
    out: Dict[Monomial, object] = {}
    if bd[0] < 0 or bd[1] < 0:
        return phi._new(phi.bidegree, {})
    for m, val in phi.terms.items():
        for s, i in enumerate(m):
            c = v.get(i)
            if not c:
                continue
            c = rat(c)
            rest = m[:s] + m[s + 1:]
            term = _scale(val, -c if s & 1 else c)
            out[rest] = _add(out[rest], term) if rest in out else term
    out = {m: x for m, x in out.items() if not _is_zero(x)}
    return phi._new(bd, out)


def interior_basis(i: int, phi: _Form) -> _Form:
    return interior({i: Fraction(1)}, phi)


def restrict_values(phi: KernelElement, j: int) -> KernelElement:
    """phi|_{V_j}: post-compose each value with the projector onto V_j."""
    d = phi.space.vdim
    keep = {0} if j == 1 else ({d - 1} if j == -1 else set(range(1, d - 1)))
    if j not in (-1, 0, 1):
        raise ValueError("j must be -1, 0 or 1")
    return phi.map_values(lambda f: {(r, c): x for (r, c), x in f.items() if c in keep})


def compose_values(phi: KernelElement, left: Optional[Mat] = None, right: Optional[Mat] = None) -> KernelElement:

    def fn(f):
        if left is not None:
            f = mat_mul(left, f)
        if right is not None:
            f = mat_mul(f, right)
        return f

    return phi.map_values(fn)


def wedge_contract(alpha: VectorForm, beta: VectorForm) -> ScalarForm:
    """alpha ^ beta with the values paired by V x V* -> R."""
    if alpha.dual or not beta.dual:
        raise TypeError("wedge_contract expects a V-valued and a V*-valued form")

    def pair(u, w, s):
        return s * sum((x * w.get(i, 0) for i, x in u.items()), Fraction(0))

    bd = (alpha.bidegree[0] + beta.bidegree[0], alpha.bidegree[1] + beta.bidegree[1])
    return ScalarForm(alpha.space, bd, _wedge_terms(alpha.terms, beta.terms, pair))


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def dump_kernel(phi: KernelElement) -> str:
    """One record per monomial: ``p_indices | q_indices | (n+2)^2 rationals``.

    P-leg indices are 0 for E and i for F_i; K-leg indices are j for G_j.
    Values are listed row-major.
    """
    sp = phi.space
    n, d = sp.n, sp.vdim
    lines = [f"# kernel n={n} p={phi.bidegree[0]} q={phi.bidegree[1]} records={len(phi.terms)}"]
    for m in sorted(phi.terms):
        pp = " ".join(str(i) for i in m if i <= n)
        qq = " ".join(str(i - n) for i in m if i > n)
        f = phi.terms[m]
        vals = " ".join(_fmt(Fraction(f.get((r, c), 0))) for r in range(d) for c in range(d))
        lines.append(f"{pp} | {qq} | {vals}")
    return "\n".join(lines) + "\n"


def load_kernel(text: str) -> KernelElement:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# kernel"):
        raise ValueError("missing kernel header")
    head = dict(tok.split("=") for tok in lines[0].split()[2:])
    n, p, q = int(head["n"]), int(head["p"]), int(head["q"])
    sp = FormSpace(n)
    d = sp.vdim
    terms = {}
    for ln in lines[1:]:
        if not ln.strip():
            continue
        pp, qq, vals = (part.split() for part in ln.split("|"))
        mono = tuple(int(i) for i in pp) + tuple(int(j) + n for j in qq)
        xs = [Fraction(t) for t in vals]
        if len(xs) != d * d:
            raise ValueError("value list has the wrong length")
        terms[mono] = {(k // d, k % d): x for k, x in enumerate(xs) if x}
    return KernelElement(sp, (p, q), terms)
