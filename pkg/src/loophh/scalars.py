"""Exact scalar arithmetic: rationals and cyclotomic extensions Q(zeta_m).

Two backends.  The rational backend is `fractions.Fraction`.  The cyclotomic
backend represents elements of Q(zeta_m) as polynomials of degree < phi(m)
in a fixed primitive m-th root of unity, with Fraction coefficients reduced
modulo the m-th cyclotomic polynomial.  All arithmetic is exact; equality is
decided on the reduced normal form.

The conductor m is fixed per field object; elements of distinct conductors
never mix (BackendMismatch), mirroring the session-level conductor contract.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache


class BackendMismatch(Exception):
    """Raised when scalars from incompatible backends meet."""


def _poly_trim(c: list[Fraction]) -> list[Fraction]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    while len(a) >= len(b):
        coef = a[-1] * inv
        deg = len(a) - len(b)
        q[deg] = coef
        for i, y in enumerate(b):
            a[deg + i] -= coef * y
        _poly_trim(a)
        if not a:
            break
    return _poly_trim(q), a


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[Fraction, ...]:
    """Coefficients (low to high) of the m-th cyclotomic polynomial.

    Computed by exact division: x^m - 1 = prod_{d | m} Phi_d(x).
    """
    if m < 1:
        raise ValueError("conductor must be >= 1")
    num = [Fraction(-1)] + [Fraction(0)] * (m - 1) + [Fraction(1)]
    for d in range(1, m):
        if m % d == 0:
            q, r = _poly_divmod(num, list(cyclotomic_polynomial(d)))
            if r:
                raise AssertionError("cyclotomic division not exact")
            num = q
    return tuple(num)


class CyclotomicField:
    """The field Q(zeta_m), zeta_m a fixed primitive m-th root of unity."""

    def __init__(self, conductor: int):
        if conductor < 1:
            raise ValueError("conductor must be >= 1")
        self.conductor = conductor
        self.modulus = list(cyclotomic_polynomial(conductor))
        self.degree = len(self.modulus) - 1  # phi(m)

    def __repr__(self):
        return f"CyclotomicField({self.conductor})"

    def __eq__(self, other):
        return isinstance(other, CyclotomicField) and other.conductor == self.conductor

    def __hash__(self):
        return hash(("CyclotomicField", self.conductor))

    def element(self, coeffs) -> "CycElt":
        c = [Fraction(x) for x in coeffs]
        if len(c) >= len(self.modulus):
            _, c = _poly_divmod(c, self.modulus)
        return CycElt(self, tuple(_poly_trim(list(c))))

    def zero(self) -> "CycElt":
        return CycElt(self, ())

    def one(self) -> "CycElt":
        return CycElt(self, (Fraction(1),))

    def zeta(self, power: int = 1) -> "CycElt":
        power %= self.conductor
        return self.element([Fraction(0)] * power + [Fraction(1)])

    def from_rational(self, q) -> "CycElt":
        q = Fraction(q)
        return CycElt(self, (q,) if q else ())


class CycElt:
    """Element of a CyclotomicField; immutable reduced polynomial in zeta."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: CyclotomicField, coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CycElt):
            if other.field != self.field:
                raise BackendMismatch(
                    f"mixed conductors {self.field.conductor} and {other.field.conductor}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return NotImplemented

    # -- ring ops ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        c = [Fraction(0)] * n
        for i, x in enumerate(self.coeffs):
            c[i] += x
        for i, x in enumerate(o.coeffs):
            c[i] += x
        return CycElt(self.field, tuple(_poly_trim(c)))

    __radd__ = __add__

    def __neg__(self):
        return CycElt(self.field, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        prod = _poly_mul(list(self.coeffs), list(o.coeffs))
        if len(prod) >= len(self.field.modulus):
            _, prod = _poly_divmod(prod, self.field.modulus)
        return CycElt(self.field, tuple(_poly_trim(prod)))

    __rmul__ = __mul__

    def inverse(self) -> "CycElt":
        """Inverse via extended Euclid against the (irreducible) modulus."""
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero cyclotomic element")
        # xgcd(a, modulus) with gcd a nonzero constant.
        r0, r1 = list(self.field.modulus), list(self.coeffs)
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_trim(
                [
                    (s0[i] if i < len(s0) else Fraction(0))
                    - sum(
                        q[j] * s1[i - j]
                        for j in range(len(q))
                        if 0 <= i - j < len(s1)
                    )
                    for i in range(max(len(s0), len(q) + len(s1) - 1))
                ]
            )
        if len(r0) != 1:
            raise AssertionError("modulus not coprime to element")
        inv_consts = 1 / r0[0]
        return self.field.element([c * inv_consts for c in s0])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field.from_rational(other) * self.inverse()

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.from_rational(other)
        if not isinstance(other, CycElt):
            return NotImplemented
        if other.field != self.field:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field.conductor, self.coeffs))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*z" if c != 1 else "z")
            else:
                terms.append(f"{c}*z^{i}" if c != 1 else f"z^{i}")
        return " + ".join(terms)


# -- backend helpers --------------------------------------------------------

def scalar_zero(sample):
    """Zero of the backend that `sample` lives in."""
    if isinstance(sample, CycElt):
        return sample.field.zero()
    return Fraction(0)


def scalar_one(sample):
    if isinstance(sample, CycElt):
        return sample.field.one()
    return Fraction(1)


def is_zero(x) -> bool:
    if isinstance(x, CycElt):
        return x.is_zero()
    return x == 0


def backend_of(x):
    """Backend tag of a scalar: None for rational, the field for cyclotomic."""
    if isinstance(x, CycElt):
        return x.field
    if isinstance(x, (int, Fraction)):
        return None
    raise BackendMismatch(f"unsupported scalar type {type(x)!r}")


def common_backend(scalars):
    """The unique backend of a collection of scalars.

    Plain rationals are absorbed into a cyclotomic backend if one is present;
    two distinct cyclotomic fields are a mismatch.
    """
    field = None
    for s in scalars:
        b = backend_of(s)
        if b is None:
            continue
        if field is None:
            field = b
        elif field != b:
            raise BackendMismatch(
                f"mixed conductors {field.conductor} and {b.conductor}"
            )
    return field


def coerce(x, field):
    """Coerce scalar x into the given backend (None = rational)."""
    if field is None:
        if isinstance(x, CycElt):
            raise BackendMismatch("cyclotomic scalar in a rational session")
        return Fraction(x)
    if isinstance(x, CycElt):
        if x.field != field:
            raise BackendMismatch(
                f"mixed conductors {x.field.conductor} and {field.conductor}"
            )
        return x
    return field.from_rational(x)
