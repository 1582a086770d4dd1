"""Binary forms over F_p: composition on lines and square detection.

A form of degree d is a dense coefficient list c[0..d] with c[i] the
coefficient of s^(d-i) t^i. The zero form of each degree is representable
(all coefficients zero) and reports is_zero().
"""

from __future__ import annotations

from .field import PrimeField
from .poly import WeightedPoly


class BinaryForm:
    __slots__ = ("field", "degree", "coeffs")

    def __init__(self, field: PrimeField, degree: int, coeffs):
        coeffs = [c % field.p for c in coeffs]
        if len(coeffs) != degree + 1:
            raise ValueError("need degree+1 coefficients")
        self.field = field
        self.degree = degree
        self.coeffs = coeffs

    def __repr__(self):
        return f"BinaryForm(p={self.field.p}, deg={self.degree}, {self.coeffs})"

    def __eq__(self, other):
        return (
            isinstance(other, BinaryForm)
            and self.field == other.field
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def evaluate(self, s: int, t: int) -> int:
        p = self.field.p
        d = self.degree
        return sum(c * pow(s, d - i, p) * pow(t, i, p) for i, c in enumerate(self.coeffs)) % p

    def __add__(self, other):
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return BinaryForm(self.field, self.degree, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return BinaryForm(self.field, self.degree, [-c for c in self.coeffs])

    def scale(self, c: int) -> "BinaryForm":
        return BinaryForm(self.field, self.degree, [c * a for a in self.coeffs])

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        p = self.field.p
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] = (out[i + j] + a * b) % p
        return BinaryForm(self.field, self.degree + other.degree, out)

    def __pow__(self, n: int) -> "BinaryForm":
        result = BinaryForm(self.field, 0, [1])
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


def compose_on_line(f: WeightedPoly, images) -> BinaryForm:
    """Restrict f to a parameterized line: each variable maps to a binary form.

    Image i must have degree w_i * k for a common line degree k (zero images
    carry their declared degree). The result has degree wdeg(f) * k.
    """
    if f.field is None:
        raise ValueError("compose_on_line needs a polynomial over a field")
    if len(images) != len(f.names):
        raise ValueError("need one image per variable")
    field = images[0].field
    k = None
    for im, w in zip(images, f.weights):
        if im.degree % w:
            raise ValueError("image degree is not a multiple of the variable weight")
        ki = im.degree // w
        if k is None:
            k = ki
        elif ki != k:
            raise ValueError("images have inconsistent line degrees")
    d = f.weighted_degree()
    if d is None:
        return BinaryForm(field, 0, [0])
    out = BinaryForm(field, d * k, [0] * (d * k + 1))
    pow_cache = [{} for _ in images]
    for exps, c in f.terms.items():
        term = BinaryForm(field, 0, [c])
        for i, e in enumerate(exps):
            if not e:
                continue
            cache = pow_cache[i]
            if e not in cache:
                cache[e] = images[i] ** e
            term = term * cache[e]
        pad = out.degree - term.degree
        if pad < 0:
            raise ValueError("inhomogeneous input")
        for j, a in enumerate(term.coeffs):
            out.coeffs[j + pad] = (out.coeffs[j + pad] + a) % field.p
    return out


def square_part(f: BinaryForm):
    """Decompose f = c * h^2 by top-down coefficient matching.

    Returns (c, h, exact). When exact, h has leading nonzero coefficient 1
    and the re-expansion c*h^2 equals f identically (verified, not assumed).
    For inexact f the returned (c, h) are the best-matched truncation.
    """
    if f.is_zero():
        raise ValueError("square_part of the zero form")
    d = f.degree
    if d % 2:
        raise ValueError("square_part needs even degree")
    F = f.field
    p = F.p
    c = f.coeffs
    mt = next(i for i in range(d + 1) if c[i])
    ms = d - max(i for i in range(d + 1) if c[i])
    half = [0] * (d // 2 + 1)
    if mt % 2 or ms % 2:
        # divisible by s or t to odd order: cannot be a square times a scalar
        lead = c[mt]
        return lead, BinaryForm(F, d // 2, half), False
    g = c[mt : d + 1 - ms]
    dg = len(g) - 1
    m = dg // 2
    lead = g[0]
    inv_lead = F.inv(lead)
    inv2 = F.inv(2)
    h0 = [1] + [0] * m
    for k in range(1, m + 1):
        acc = sum(h0[i] * h0[k - i] for i in range(1, k)) % p
        h0[k] = ((g[k] * inv_lead - acc) * inv2) % p
    # re-expansion check over the full coefficient range
    sq = [0] * (dg + 1)
    for i in range(m + 1):
        if h0[i]:
            for j in range(m + 1):
                sq[i + j] = (sq[i + j] + h0[i] * h0[j]) % p
    exact = all((lead * sq[j] - g[j]) % p == 0 for j in range(dg + 1))
    for j in range(m + 1):
        half[mt // 2 + j] = h0[j]
    return lead, BinaryForm(F, d // 2, half), exact


# -- dense univariate helpers (coefficient lists, lowest degree first) ----


def _trim(u):
    while u and u[-1] == 0:
        u.pop()
    return u


def poly_deg(u) -> int:
    return len(u) - 1


def poly_derivative(field: PrimeField, u):
    return _trim([(k * u[k]) % field.p for k in range(1, len(u))])


def poly_divmod(field: PrimeField, u, v):
    p = field.p
    u = [c % p for c in u]
    v = _trim([c % p for c in v])
    if not v:
        raise ZeroDivisionError("division by the zero polynomial")
    inv = field.inv(v[-1])
    q = [0] * max(0, len(u) - len(v) + 1)
    r = list(u)
    while len(_trim(r)) >= len(v):
        r = _trim(r)
        k = len(r) - len(v)
        f = (r[-1] * inv) % p
        q[k] = f
        for i, c in enumerate(v):
            r[k + i] = (r[k + i] - f * c) % p
    return _trim(q), _trim(r)


def poly_gcd(field: PrimeField, u, v):
    """Monic gcd via the Euclidean algorithm."""
    p = field.p
    a = _trim([c % p for c in u])
    b = _trim([c % p for c in v])
    while b:
        _, r = poly_divmod(field, a, b)
        a, b = b, r
    if a:
        inv = field.inv(a[-1])
        a = [(c * inv) % p for c in a]
    return a


def multiplicity_profile(f: BinaryForm) -> int:
    """Degree of gcd(f, f_s, f_t): total root multiplicity above one each.

    Computed on the dehomogenization, with the root at t=0 handled
    separately. Valid in characteristic p > deg f.
    """
    if f.is_zero():
        raise ValueError("multiplicity_profile of the zero form")
    if f.field.p <= f.degree:
        raise ValueError("multiplicity_profile needs p > deg f")
    d = f.degree
    c = f.coeffs
    mt = next(i for i in range(d + 1) if c[i])
    u = _trim([c[d - k] for k in range(d + 1)])
    g = poly_gcd(f.field, u, poly_derivative(f.field, u))
    return poly_deg(g) + max(mt - 1, 0)


def all_multiplicities_even(f: BinaryForm) -> bool:
    """Even-multiplicity test by the radical-square gcd ladder.

    Independent cross-check for square_part: uses only gcd and exact
    division, never coefficient matching. Valid for p > deg f.
    """
    if f.is_zero():
        raise ValueError("even-multiplicity test of the zero form")
    if f.field.p <= f.degree:
        raise ValueError("even-multiplicity test needs p > deg f")
    d = f.degree
    c = f.coeffs
    mt = next(i for i in range(d + 1) if c[i])
    ms = d - max(i for i in range(d + 1) if c[i])
    if mt % 2 or ms % 2:
        return False
    u = _trim([c[d - k] for k in range(d + 1)])
    while poly_deg(u) > 0:
        g = poly_gcd(f.field, u, poly_derivative(f.field, u))
        radical, rem = poly_divmod(f.field, u, g)
        if rem:
            raise ArithmeticError("radical division must be exact")
        rad_sq = [0] * (2 * len(radical) - 1)
        p = f.field.p
        for i, a in enumerate(radical):
            if a:
                for j, b in enumerate(radical):
                    rad_sq[i + j] = (rad_sq[i + j] + a * b) % p
        q, rem = poly_divmod(f.field, u, rad_sq)
        if rem:
            return False
        u = q
    return True


def cubic_multiple_root(field: PrimeField, coeffs):
    """Multiple root of a monic-by-scaling univariate cubic, if any.

    coeffs = [c0, c1, c2, c3] lowest first, c3 != 0. Returns (root, is_triple)
    or None when the cubic is squarefree. A multiple root of a cubic over F_p
    is always rational, read off from gcd(c, c').
    """
    u = _trim([c % field.p for c in coeffs])
    if poly_deg(u) != 3:
        raise ValueError("need a genuine cubic")
    g = poly_gcd(field, u, poly_derivative(field, u))
    if poly_deg(g) == 0:
        return None
    if poly_deg(g) == 1:
        root = field.neg(field.div(g[0], g[1]))
        return root, False
    # gcd of degree 2 means (y - r)^2 divides the derivative: triple root
    root = field.neg(field.div(g[1], field.mul(2, g[2])))
    return root, True
