"""Independent brute-force routes used to cross-check the package.

Nothing here goes through the sparse row reducer, the Killing table or the
operator calculus.  Run as a script to refresh ``data/oracle_frozen.json``.
"""

import json
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from pathlib import Path

from tractor_poisson.lie import AlgebraModel

FROZEN = Path(__file__).parent / "data" / "oracle_frozen.json"


def dense_rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    rank, ncols = 0, len(m[0])
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def dense(mat, d):
    return [[mat.get((r, c), Fraction(0)) for c in range(d)] for r in range(d)]


def mul(a, b):
    d = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]


def trace(a):
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def solve_coords(basis_dense, x):
    """Coordinates of x in the span of basis_dense by Gaussian elimination on flattened entries."""
    d = len(x)
    cols = [[b[i][j] for i in range(d) for j in range(d)] for b in basis_dense]
    target = [x[i][j] for i in range(d) for j in range(d)]
    nb = len(cols)
    aug = [[cols[c][r] for c in range(nb)] + [target[r]] for r in range(d * d)]
    row, pivots = 0, []
    for col in range(nb):
        piv = next((r for r in range(row, len(aug)) if aug[r][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        p = aug[row][col]
        aug[row] = [v / p for v in aug[row]]
        for r in range(len(aug)):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    assert all(any(r[:nb]) or r[nb] == 0 for r in aug), "not in span"
    out = [Fraction(0)] * nb
    for r, col in enumerate(pivots):
        out[col] = aug[r][nb]
    return out


def killing_by_trace(n):
    """B(X, Y) = tr(ad X ad Y) with ad assembled by solving for bracket coordinates."""
    a = AlgebraModel(n)
    d = n + 2
    basis = [dense(x, d) for x in a.basis]
    dim = len(basis)
    ad = []
    for x in basis:
        cols = [solve_coords(basis, [[p - q for p, q in zip(r1, r2)] for r1, r2 in zip(mul(x, y), mul(y, x))]) for y in basis]
        ad.append([[cols[j][i] for j in range(dim)] for i in range(dim)])
    return [[trace(mul(ad[i], ad[j])) for j in range(dim)] for i in range(dim)]


def killing_by_matrix_trace(n):
    """B(X, Y) = n tr(XY) on so(n+1,1) in its defining representation."""
    a = AlgebraModel(n)
    d = n + 2
    basis = [dense(x, d) for x in a.basis]
    return [[n * trace(mul(x, y)) for y in basis] for x in basis]


def casimir_scalar(n):
    """Casimir of the defining representation from the trace-form Killing Gram."""
    a = AlgebraModel(n)
    d = n + 2
    basis = [dense(x, d) for x in a.basis]
    gram = killing_by_matrix_trace(n)
    dim = len(basis)
    inv = [solve_coords_vec(gram, [Fraction(int(i == j)) for i in range(dim)]) for j in range(dim)]
    cas = [[Fraction(0)] * d for _ in range(d)]
    for i in range(dim):
        for j in range(dim):
            if inv[j][i]:
                p = mul(basis[i], basis[j])
                cas = [[c + inv[j][i] * v for c, v in zip(r1, r2)] for r1, r2 in zip(cas, p)]
    scal = cas[0][0]
    assert all(cas[r][c] == (scal if r == c else 0) for r in range(d) for c in range(d))
    return scal


def solve_coords_vec(m, b):
    d = len(m)
    aug = [list(m[r]) + [b[r]] for r in range(d)]
    for col in range(d):
        piv = next(r for r in range(col, d) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][d] for r in range(d)]


def kostant_matrix(n, k):
    """Dense matrix of the codifferential C_k -> C_{k-1} from the matrices of xi_1..xi_n."""
    a = AlgebraModel(n)
    d = n + 2
    xis = [dense(a.basis[a.xi(i)], d) for i in range(1, n + 1)]
    src = [(m, v) for m in combinations(range(n), k) for v in range(d)]
    tgt = {(m, v): r for r, (m, v) in enumerate((m, v) for m in combinations(range(n), k - 1) for v in range(d))}
    rows = [[Fraction(0)] * len(src) for _ in range(len(tgt))]
    for col, (m, v) in enumerate(src):
        for s, i in enumerate(m):
            rest = m[:s] + m[s + 1:]
            for r in range(d):
                if xis[i][r][v]:
                    rows[tgt[(rest, r)]][col] += (-1) ** s * xis[i][r][v]
    return rows


def homology_dims(n):
    d = n + 2
    ranks = [0] + [dense_rank(kostant_matrix(n, k)) for k in range(1, n + 1)] + [0]
    return [comb(n, k) * d - ranks[k] - ranks[k + 1] for k in range(n + 1)]


def dP_E_star_power_coefficient(n):
    """(sum_i F*_i ^ G*_i)^n on F*_1..F*_n ^ G*_1..G*_n: n! times the shuffle sign."""
    return factorial(n) * (-1) ** (n * (n - 1) // 2)


def one_form_derivative(calc, phi_values, twist_theta=False):
    """d of an End(V)-valued one-form by inserting every pair of quotient basis vectors.

    phi_values: dict quotient-index -> End matrix.  Returns dict (a, b) -> matrix, a < b.
    """
    from tractor_poisson.lie import QuotientGM

    q = QuotientGM(calc.true_algebra)
    a = calc.true_algebra
    d = calc.vdim
    reps = [dense(m, d) for m in q.rep_mats]

    def rho(x, f):
        left = [[-x[c][r] for c in range(d)] for r in range(d)] if twist_theta else x
        return [[u - v for u, v in zip(r1, r2)] for r1, r2 in zip(mul(left, f), mul(f, x))]

    zero = [[Fraction(0)] * d for _ in range(d)]
    vals = {i: dense(phi_values.get(i, {}), d) for i in range(q.dim)}
    out = {}
    for i, j in combinations(range(q.dim), 2):
        br = q.project(a.bracket_coords(q.rep_coords[i], q.rep_coords[j]))
        tot = [[u - v for u, v in zip(r1, r2)] for r1, r2 in zip(rho(reps[i], vals[j]), rho(reps[j], vals[i]))]
        for c, x in br.items():
            tot = [[u - x * v for u, v in zip(r1, r2)] for r1, r2 in zip(tot, vals[c])]
        if tot != zero:
            out[(i, j)] = tot
    return out


def compute_frozen():
    out = {"homology": {}, "killing": {}, "casimir": {}, "dP_E_star_power": {}}
    for n in range(2, 6):
        out["homology"][str(n)] = homology_dims(n)
        b = killing_by_matrix_trace(n)
        a = AlgebraModel(n)
        out["killing"][str(n)] = {
            "E~,E~": str(b[a.grading][a.grading]),
            "xi_1,eta_1": str(b[a.xi(1)][a.eta(1)]),
        }
        out["casimir"][str(n)] = str(casimir_scalar(n))
        out["dP_E_star_power"][str(n)] = dP_E_star_power_coefficient(n)
    return out


if __name__ == "__main__":
    FROZEN.parent.mkdir(exist_ok=True)
    FROZEN.write_text(json.dumps(compute_frozen(), indent=2, sort_keys=True) + "\n")
