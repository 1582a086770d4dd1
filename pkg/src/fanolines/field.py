"""Arithmetic in prime fields F_p for small odd p.

Field elements are plain Python ints kept as canonical residues in [0, p).
A ``PrimeField`` instance carries the modulus plus lazily built lookup
tables (quadratic character, square roots) that the counting code leans on.
"""

from __future__ import annotations

from dataclasses import dataclass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """F_p with p an odd prime >= 3."""

    def __init__(self, p: int):
        if not is_prime(p) or p < 3:
            raise ValueError(f"modulus must be an odd prime >= 3, got {p}")
        self.p = p
        self._chi = None
        self._sqrt = None

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(a, self.p - 2, self.p)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.p

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def chi(self, a: int) -> int:
        """Quadratic character: 0 for a=0, +1 for nonzero squares, -1 otherwise."""
        if self._chi is None:
            tab = [-1] * self.p
            tab[0] = 0
            for x in range(1, self.p):
                tab[(x * x) % self.p] = 1
            self._chi = tab
        return self._chi[a % self.p]

    def sqrt(self, a: int) -> int:
        """Smallest square root of a, or ValueError when a is a non-square."""
        if self._sqrt is None:
            tab = {}
            for x in range(self.p - 1, -1, -1):
                tab[(x * x) % self.p] = x
            self._sqrt = tab
        a %= self.p
        if a not in self._sqrt:
            raise ValueError(f"{a} is not a square mod {self.p}")
        return self._sqrt[a]

    def elements(self) -> range:
        return range(self.p)


@dataclass
class GaussResult:
    """Outcome of Gaussian elimination on an augmented system."""

    consistent: bool
    solution: list | None
    rank: int


def gauss_solve(field: PrimeField, rows: list, rhs: list) -> GaussResult:
    """Solve M x = rhs over F_p by row reduction.

    Returns one solution (free variables set to 0) plus the rank of M,
    or consistent=False when the system has no solution.
    """
    p = field.p
    m = [[v % p for v in row] + [rhs[i] % p] for i, row in enumerate(rows)]
    nrows = len(m)
    ncols = len(rows[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = field.inv(m[r][c])
        m[r] = [(v * inv) % p for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    rank = r
    for i in range(rank, nrows):
        if m[i][ncols]:
            return GaussResult(False, None, rank)
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    return GaussResult(True, x, rank)


def matrix_mul(field: PrimeField, a: list, b: list) -> list:
    p = field.p
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for j in range(m):
            out[i][j] = sum(ai[t] * b[t][j] for t in range(k)) % p
    return out


def matrix_vec(field: PrimeField, a: list, v: list) -> list:
    p = field.p
    return [sum(row[j] * v[j] for j in range(len(v))) % p for row in a]


def identity_matrix(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matrix_inverse(field: PrimeField, a: list) -> list:
    """Inverse of a square matrix; ValueError when singular."""
    p = field.p
    n = len(a)
    m = [[a[i][j] % p for j in range(n)] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c]), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        m[c], m[pivot] = m[pivot], m[c]
        inv = field.inv(m[c][c])
        m[c] = [(v * inv) % p for v in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


def basis_change_to_e0(field: PrimeField, v: list) -> list:
    """Invertible matrix B with B applied to v giving e0 = (1,0,...,0).

    The inverse of B is the matrix whose first column is v, completed by
    identity columns away from a chosen nonzero pivot of v.
    """
    p = field.p
    n = len(v)
    vv = [x % p for x in v]
    pivot = next((i for i in range(n) if vv[i]), None)
    if pivot is None:
        raise ValueError("cannot move the zero vector to e0")
    binv = [[0] * n for _ in range(n)]
    for i in range(n):
        binv[i][0] = vv[i]
    col = 1
    for j in range(n):
        if j == pivot:
            continue
        binv[j][col] = 1
        col += 1
    return matrix_inverse(field, binv)
