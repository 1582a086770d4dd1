"""Sparse multivariate polynomials with weighted-homogeneous grading.

Terms live in a dict mapping exponent tuples to integer coefficients.
A polynomial knows its variable names, their positive integer weights and
(optionally) the prime field its coefficients are reduced in; field=None
means integer coefficients.
"""

from __future__ import annotations

from .field import PrimeField


class WeightedPoly:
    __slots__ = ("names", "weights", "field", "terms")

    def __init__(self, names, weights, field, terms=None):
        names = tuple(names)
        weights = tuple(int(w) for w in weights)
        if len(names) != len(weights):
            raise ValueError("names and weights must have equal length")
        if any(w < 1 for w in weights):
            raise ValueError("weights must be positive integers")
        self.names = names
        self.weights = weights
        self.field = field
        clean = {}
        for exps, c in (terms or {}).items():
            if field is not None:
                c %= field.p
            if c:
                clean[tuple(exps)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, names, weights, field=None):
        return cls(names, weights, field, {})

    @classmethod
    def constant(cls, names, weights, c, field=None):
        return cls(names, weights, field, {tuple(0 for _ in names): c})

    @classmethod
    def variable(cls, names, weights, i, field=None):
        e = [0] * len(names)
        e[i] = 1
        return cls(names, weights, field, {tuple(e): 1})

    def clone(self, terms):
        return WeightedPoly(self.names, self.weights, self.field, terms)

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def same_ring(self, other: "WeightedPoly") -> bool:
        return (
            self.names == other.names
            and self.weights == other.weights
            and self.field == other.field
        )

    def weighted_degree(self):
        """Max weighted degree over terms; None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e * w for e, w in zip(exps, self.weights)) for exps in self.terms)

    def is_homogeneous(self, d=None) -> bool:
        degs = {sum(e * w for e, w in zip(exps, self.weights)) for exps in self.terms}
        if not degs:
            return True
        if d is None:
            return len(degs) == 1
        return degs == {d}

    # -- ring operations ----------------------------------------------

    def _check(self, other):
        if not self.same_ring(other):
            raise ValueError("polynomials live in different rings")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return self.clone(out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) - c
        return self.clone(out)

    def __neg__(self):
        return self.clone({e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.clone({e: c * other for e, c in self.terms.items()})
        self._check(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return self.clone(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = WeightedPoly.constant(self.names, self.weights, 1, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        return (
            isinstance(other, WeightedPoly)
            and self.same_ring(other)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.names, self.weights, frozenset(self.terms.items())))

    # -- evaluation and substitution ------------------------------------

    def evaluate(self, point) -> int:
        """Value at a point (sequence of ints, one per variable)."""
        if len(point) != len(self.names):
            raise ValueError("point has wrong length")
        p = self.field.p if self.field is not None else None
        total = 0
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(point, exps):
                if e:
                    v *= x**e if p is None else pow(x, e, p)
            total += v
        return total % p if p is not None else total

    def partial(self, i: int) -> "WeightedPoly":
        out = {}
        for exps, c in self.terms.items():
            if exps[i] == 0:
                continue
            e = list(exps)
            k = e[i]
            e[i] = k - 1
            e = tuple(e)
            out[e] = out.get(e, 0) + c * k
        return self.clone(out)

    def substitute(self, images) -> "WeightedPoly":
        """Replace every variable by the given image polynomial.

        All images must share one target ring, and each nonzero image must be
        weighted-homogeneous of degree w_i * k for a common scaling degree k.
        """
        if len(images) != len(self.names):
            raise ValueError("need one image per variable")
        target = images[0]
        for im in images[1:]:
            if not target.same_ring(im):
                raise ValueError("images live in different rings")
        k = None
        for im, w in zip(images, self.weights):
            d = im.weighted_degree()
            if d is None:
                continue
            if not im.is_homogeneous(d):
                raise ValueError("image is not weighted-homogeneous")
            if d % w:
                raise ValueError("image degree is not a multiple of the variable weight")
            if k is None:
                k = d // w
            elif d != w * k:
                raise ValueError("images have inconsistent scaling degrees")
        out = WeightedPoly.zero(target.names, target.weights, target.field)
        pow_cache = [{} for _ in images]
        one = WeightedPoly.constant(target.names, target.weights, 1, target.field)
        for exps, c in self.terms.items():
            term = one * c
            for i, e in enumerate(exps):
                if not e:
                    continue
                cache = pow_cache[i]
                if e not in cache:
                    cache[e] = images[i] ** e
                term = term * cache[e]
            out = out + term
        return out

    def substitute_variable(self, i: int, image: "WeightedPoly") -> "WeightedPoly":
        """Replace one variable, keeping the others (a shear when image = x_i + L)."""
        images = [
            WeightedPoly.variable(self.names, self.weights, j, self.field)
            for j in range(len(self.names))
        ]
        images[i] = image
        return self.substitute(images)

    def apply_linear_change(self, field: PrimeField, matrix) -> "WeightedPoly":
        """Substitute x_i -> sum_j M[i][j] x_j on the weight-1 prefix block.

        Variables of weight > 1 are left fixed; the weight-1 variables must
        form a prefix of the variable list.
        """
        n1 = sum(1 for w in self.weights if w == 1)
        if any(w != 1 for w in self.weights[:n1]):
            raise ValueError("weight-1 variables must form a prefix")
        if len(matrix) != n1 or any(len(row) != n1 for row in matrix):
            raise ValueError("matrix must be square of size = number of weight-1 variables")
        images = []
        for i in range(len(self.names)):
            if i < n1:
                terms = {}
                for j in range(n1):
                    c = matrix[i][j] % field.p
                    if c:
                        e = [0] * len(self.names)
                        e[j] = 1
                        terms[tuple(e)] = c
                images.append(WeightedPoly(self.names, self.weights, self.field, terms))
            else:
                images.append(WeightedPoly.variable(self.names, self.weights, i, self.field))
        return self.substitute(images)

    # -- grading -----------------------------------------------------

    def graded_slice(self, i: int, e: int) -> "WeightedPoly":
        """Coefficient of x_i^e, as a polynomial in the remaining variables."""
        names = self.names[:i] + self.names[i + 1 :]
        weights = self.weights[:i] + self.weights[i + 1 :]
        out = {}
        for exps, c in self.terms.items():
            if exps[i] == e:
                out[exps[:i] + exps[i + 1 :]] = c
        return WeightedPoly(names, weights, self.field, out)

    def degree_in(self, i: int) -> int:
        return max((exps[i] for exps in self.terms), default=0)

    def reduce_mod(self, field: PrimeField) -> "WeightedPoly":
        if self.field is not None:
            raise ValueError("polynomial is already over a field")
        return WeightedPoly(self.names, self.weights, field, self.terms)

    def lift_to(self, names, weights, field=None) -> "WeightedPoly":
        """Reinterpret in a larger ring; existing variables matched by name."""
        names = tuple(names)
        weights = tuple(weights)
        idx = []
        for name, w in zip(self.names, self.weights):
            j = names.index(name)
            if weights[j] != w:
                raise ValueError(f"variable {name} changes weight")
            idx.append(j)
        out = {}
        for exps, c in self.terms.items():
            e = [0] * len(names)
            for pos, ex in zip(idx, exps):
                e[pos] = ex
            out[tuple(e)] = c
        return WeightedPoly(names, weights, field if field is not None else self.field, out)

    def restrict_to(self, names) -> "WeightedPoly":
        """Project onto a subring; terms using dropped variables must be absent."""
        names = tuple(names)
        keep = [self.names.index(nm) for nm in names]
        dropped = [i for i in range(len(self.names)) if i not in keep]
        out = {}
        for exps, c in self.terms.items():
            if any(exps[i] for i in dropped):
                raise ValueError("term uses a dropped variable")
            out[tuple(exps[i] for i in keep)] = c
        return WeightedPoly(names, tuple(self.weights[i] for i in keep), self.field, out)

    # -- interchange ---------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items())

    def to_arrays(self):
        """(exponent rows, coefficients) in canonical order, for the kernels."""
        items = self.sorted_terms()
        return [list(e) for e, _ in items], [c for _, c in items]

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = []
            for name, e in zip(self.names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            if factors:
                parts.append("*".join(([str(c)] if c != 1 else []) + factors))
            else:
                parts.append(str(c))
        return " + ".join(parts)


def jacobian(polys, var_indices=None):
    """Rows of partial derivatives, one row per polynomial."""
    if not polys:
        return []
    nvars = len(polys[0].names)
    idx = list(range(nvars)) if var_indices is None else list(var_indices)
    return [[f.partial(i) for i in idx] for f in polys]


def monomial_exponents(weights, degree):
    """All exponent tuples of exact weighted degree, in lexicographic order."""
    weights = tuple(weights)

    def rec(i, remaining):
        if i == len(weights):
            if remaining == 0:
                yield ()
            return
        w = weights[i]
        for e in range(remaining // w, -1, -1):
            for rest in rec(i + 1, remaining - e * w):
                yield (e,) + rest

    return sorted(rec(0, degree))
