"""Exact scalar arithmetic over prime fields GF(p) and the rationals.

Scalars are stored as plain canonical values: an ``int`` in ``0..p-1`` for
GF(p), a reduced ``fractions.Fraction`` for Q.  Equality of scalars is
therefore structural equality of the underlying values, which the rest of
the library relies on for exact comparisons.
"""

from __future__ import annotations

from fractions import Fraction


class FieldError(ValueError):
    """Raised for malformed or unsupported field specifications."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """Arithmetic context for GF(p) or Q.

    ``kind`` is "prime" or "rationals"; prime fields carry their modulus
    ``p``.  All operations return canonical scalars.
    """

    __slots__ = ("kind", "p", "char")

    def __init__(self, kind: str, p: int | None = None):
        if kind == "prime":
            if p is None or not _is_prime(p):
                raise FieldError(f"GF({p}): modulus must be a prime integer")
            if p > 2**31:
                raise FieldError(f"GF({p}): moduli above 2^31 are not supported")
            self.p = p
            self.char = p
        elif kind == "rationals":
            self.p = None
            self.char = 0
        else:
            raise FieldError(f"unsupported field kind {kind!r}")
        self.kind = kind

    # -- constructors ------------------------------------------------------

    @staticmethod
    def parse(text: str) -> "Field":
        """Parse a field spec: ``GF(p)`` or ``Q``."""
        t = text.strip()
        if t == "Q":
            return Field("rationals")
        if t.startswith("GF(") and t.endswith(")"):
            inner = t[3:-1].strip()
            try:
                n = int(inner)
            except ValueError:
                raise FieldError(f"bad field spec {text!r}") from None
            if not _is_prime(n):
                # distinguish prime powers to give the promised message
                for q in range(2, n):
                    if _is_prime(q):
                        k, m = 0, n
                        while m % q == 0:
                            m //= q
                            k += 1
                        if m == 1 and k > 1:
                            raise FieldError(
                                f"unsupported field GF({q}^{k}): only prime fields and Q"
                            )
                raise FieldError(f"GF({n}): modulus must be a prime integer")
            return Field("prime", n)
        raise FieldError(f"bad field spec {text!r}")

    def spec(self) -> str:
        return "Q" if self.kind == "rationals" else f"GF({self.p})"

    # -- element helpers ---------------------------------------------------

    def zero(self):
        return 0 if self.p is not None else Fraction(0)

    def one(self):
        return 1 if self.p is not None else Fraction(1)

    def of(self, n) -> object:
        """Canonical scalar from an int, Fraction, or num/den pair."""
        if self.p is not None:
            if isinstance(n, Fraction):
                if n.denominator == 1:
                    return n.numerator % self.p
                return self.mul(n.numerator % self.p, self.inv(n.denominator % self.p))
            return int(n) % self.p
        return Fraction(n)

    def add(self, a, b):
        return (a + b) % self.p if self.p is not None else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p is not None else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.p is not None else a * b

    def neg(self, a):
        return (-a) % self.p if self.p is not None else -a

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        if self.p is not None:
            return pow(a, self.p - 2, self.p)
        return 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return not a

    def elements(self):
        """All field elements; prime fields only."""
        if self.p is None:
            raise FieldError("cannot enumerate Q")
        return range(self.p)

    # -- scalar text form --------------------------------------------------

    def show(self, a) -> str:
        if self.p is not None:
            return str(a)
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def parse_scalar(self, text: str):
        t = text.strip()
        if "/" in t:
            if self.p is not None:
                num, den = t.split("/", 1)
                return self.div(self.of(int(num)), self.of(int(den)))
            return Fraction(t)
        return self.of(int(t))

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Field) and self.kind == other.kind and self.p == other.p

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return f"Field({self.spec()})"


GF2 = Field("prime", 2)
QQ = Field("rationals")
