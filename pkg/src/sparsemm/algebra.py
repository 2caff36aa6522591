"""Exact rings and binary extension fields.

Ring elements are plain Python ints in canonical form; a ring object owns the
arithmetic.  Hot loops in the rest of the package bind ``ring.add`` /
``ring.mul`` to locals, so a :class:`CountingRing` wrapper sees every
operation.  :class:`RingElement` is a small operator-overloading wrapper for
interactive use and for catching mixed-ring mistakes.

Polynomials over GF(2^b) (:class:`Poly`) exist only to build expanders: the
field GF(q) used there is itself a :class:`BinaryField`.
"""

from __future__ import annotations

import itertools
from functools import total_ordering


class DomainError(ValueError):
    """Operands from different rings, or an argument outside a ring's domain."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    i = 3
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class Ring:
    """Base class.  Subclasses define ``tag``, ``zero``, ``one`` and the ops."""

    zero = 0
    one = 1
    tag = "?"

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        return a == 0

    def normalize(self, a: int) -> int:
        """Map an arbitrary int to its canonical representative."""
        raise NotImplementedError

    def contains(self, a) -> bool:
        return isinstance(a, int) and self.normalize(a) == a

    def random(self, rng, nonzero=False) -> int:
        raise NotImplementedError

    def format(self, a: int) -> str:
        return str(a)

    def parse(self, text: str) -> int:
        a = int(text)
        if not self.contains(a):
            raise DomainError(f"{text!r} is not a canonical element of {self.tag}")
        return a

    def pow(self, a, e: int):
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def __call__(self, value) -> "RingElement":
        return RingElement(self, self.normalize(value))

    def __eq__(self, other):
        return isinstance(other, Ring) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"<ring {self.tag}>"


class Integers(Ring):
    tag = "Z"

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def normalize(self, a):
        return int(a)

    def contains(self, a):
        return isinstance(a, int)

    def random(self, rng, nonzero=False, bound=9):
        while True:
            a = int(rng.integers(-bound, bound + 1))
            if a or not nonzero:
                return a


class PrimeField(Ring):
    def __init__(self, p: int):
        if not is_prime(p):
            raise DomainError(f"{p} is not prime")
        self.p = p
        self.tag = f"Fp:{p}"

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return a * b % self.p

    def normalize(self, a):
        return int(a) % self.p

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def random(self, rng, nonzero=False):
        lo = 1 if nonzero else 0
        return int(rng.integers(lo, self.p))


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit patterns."""
    if a < b:
        a, b = b, a
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def clmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


# GF(2^b) fields up to this size get exp/log tables.
TABLE_BITS = 16


class BinaryField(Ring):
    """GF(2^b) as GF(2)[x]/(modulus); elements are b-bit patterns."""

    def __init__(self, b: int, modulus: int | None = None):
        if b < 1:
            raise DomainError("extension degree must be >= 1")
        if modulus is None:
            modulus = default_modulus(b)
        if modulus.bit_length() != b + 1:
            raise DomainError(f"modulus {modulus:#x} does not have degree {b}")
        if not _gf2_irreducible(modulus):
            raise DomainError(f"modulus {modulus:#x} is reducible over GF(2)")
        self.b = b
        self.modulus = modulus
        self.order = 1 << b
        self.tag = f"F2e:{b}:{modulus:x}"
        self._exp = self._log = None
        if b <= TABLE_BITS:
            self._build_tables()

    def _build_tables(self):
        order = self.order
        if order == 2:
            self._exp, self._log = [1, 1], [0, 0]
            return
        for g in range(2, order):
            exp = [0] * (2 * order)
            x = 1
            for i in range(order - 1):
                exp[i] = x
                x = clmod(clmul(x, g), self.modulus)
                if x == 1 and i < order - 2:
                    break
            else:
                for i in range(order - 1, 2 * order):
                    exp[i] = exp[i - (order - 1)]
                log = [0] * order
                for i in range(order - 1):
                    log[exp[i]] = i
                self._exp, self._log = exp, log
                return
        raise AssertionError("no generator found")  # pragma: no cover

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def mul(self, a, b):
        if not a or not b:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return clmod(clmul(a, b), self.modulus)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self._exp is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def normalize(self, a):
        a = int(a)
        if a < 0:
            raise DomainError("negative bit pattern")
        return clmod(a, self.modulus)

    def random(self, rng, nonzero=False):
        lo = 1 if nonzero else 0
        return int(rng.integers(lo, self.order))

    def format(self, a):
        return format(a, "x")

    def parse(self, text):
        a = int(text, 16)
        if not self.contains(a):
            raise DomainError(f"{text!r} is not a canonical element of {self.tag}")
        return a


def _gf2_irreducible(f: int) -> bool:
    # Trial division by every polynomial of degree <= deg/2; only used on
    # field moduli, which are small.
    n = f.bit_length() - 1
    if n < 1:
        return False
    for g in range(2, 1 << (n // 2 + 1)):
        if clmod(f, g) == 0:
            return False
    return True


_default_moduli: dict[int, int] = {}


def default_modulus(b: int) -> int:
    """Smallest irreducible degree-b polynomial over GF(2), as a bit pattern."""
    if b not in _default_moduli:
        if b == 1:
            _default_moduli[b] = 0b10
        else:
            p = find_irreducible(1, b)
            _default_moduli[b] = sum(c << i for i, c in enumerate(p.coeffs))
    return _default_moduli[b]


class CountingRing(Ring):
    """Delegating wrapper that tallies ring operations.

    ``adds`` covers add, sub and neg; ``muls`` covers mul.  Counters are the
    only mutable state in the package and belong to the caller that made the
    wrapper.
    """

    def __init__(self, base: Ring):
        self.base = base
        self.tag = base.tag
        self.zero = base.zero
        self.one = base.one
        self.adds = 0
        self.muls = 0

    def reset(self):
        self.adds = self.muls = 0

    def add(self, a, b):
        self.adds += 1
        return self.base.add(a, b)

    def sub(self, a, b):
        self.adds += 1
        return self.base.sub(a, b)

    def neg(self, a):
        self.adds += 1
        return self.base.neg(a)

    def mul(self, a, b):
        self.muls += 1
        return self.base.mul(a, b)

    def is_zero(self, a):
        return self.base.is_zero(a)

    def normalize(self, a):
        return self.base.normalize(a)

    def contains(self, a):
        return self.base.contains(a)

    def random(self, rng, nonzero=False):
        return self.base.random(rng, nonzero=nonzero)

    def format(self, a):
        return self.base.format(a)

    def parse(self, text):
        return self.base.parse(text)


@total_ordering
class RingElement:
    """Immutable element tied to its ring.  Mixing rings raises DomainError."""

    __slots__ = ("ring", "value")

    def __init__(self, ring: Ring, value: int):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("RingElement is immutable")

    def _other(self, other):
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise DomainError(f"cannot combine {self.ring.tag} with {other.ring.tag}")
            return other.value
        if isinstance(other, int):
            return self.ring.normalize(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return RingElement(self.ring, self.ring.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return RingElement(self.ring, self.ring.sub(self.value, o))

    def __rsub__(self, other):
        o = self._other(other)
        return RingElement(self.ring, self.ring.sub(o, self.value))

    def __mul__(self, other):
        o = self._other(other)
        return RingElement(self.ring, self.ring.mul(self.value, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.value))

    def __pow__(self, e):
        return RingElement(self.ring, self.ring.pow(self.value, e))

    def is_zero(self):
        return self.ring.is_zero(self.value)

    def __eq__(self, other):
        if isinstance(other, RingElement):
            return self.ring == other.ring and self.value == other.value
        if isinstance(other, int):
            return self.value == self.ring.normalize(other)
        return NotImplemented

    def __lt__(self, other):
        return self.value < self._other(other)

    def __hash__(self):
        return hash((self.ring.tag, self.value))

    def __repr__(self):
        return f"{self.ring.format(self.value)} in {self.ring.tag}"


def ring_from_tag(tag: str) -> Ring:
    """Parse ``Z``, ``Fp:<p>`` or ``F2e:<b>:<modulus-hex>``."""
    parts = tag.split(":")
    try:
        if parts == ["Z"]:
            return Integers()
        if parts[0] == "Fp" and len(parts) == 2:
            return PrimeField(int(parts[1]))
        if parts[0] == "F2e" and len(parts) in (2, 3):
            b = int(parts[1])
            modulus = int(parts[2], 16) if len(parts) == 3 else None
            return BinaryField(b, modulus)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad ring tag {tag!r}") from exc
    raise DomainError(f"bad ring tag {tag!r}")


# -- polynomials over GF(2^b) -------------------------------------------------


class Poly:
    """Polynomial over a BinaryField, coefficients lowest degree first.

    The zero polynomial has no coefficients and degree -1.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field: BinaryField, coeffs):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def x(cls, field):
        return cls(field, (0, 1))

    @classmethod
    def constant(cls, field, c):
        return cls(field, (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, Poly) and self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                coef = "" if (c == 1 and i) else format(c, "x")
                terms.append(coef + ("x^%d" % i if i > 1 else "x" if i == 1 else ""))
        return "Poly(" + " + ".join(reversed(terms)) + ")"

    def _check(self, other):
        if self.field != other.field:
            raise DomainError("polynomials over different fields")

    def __add__(self, other):
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(self.field, [x ^ y for x, y in itertools.zip_longest(a, b, fillvalue=0)])

    __sub__ = __add__

    def __mul__(self, other):
        self._check(other)
        if not self.coeffs or not other.coeffs:
            return Poly(self.field, ())
        mul = self.field.mul
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] ^= mul(a, b)
        return Poly(self.field, out)

    def scale(self, c):
        return Poly(self.field, [self.field.mul(c, a) for a in self.coeffs])

    def __divmod__(self, other):
        self._check(other)
        if other.is_zero():
            raise DomainError("division by the zero polynomial")
        f = self.field
        r = list(self.coeffs)
        db = other.degree
        lead_inv = f.inv(other.coeffs[-1])
        q = [0] * max(len(r) - db, 0)
        for k in range(len(r) - 1 - db, -1, -1):
            c = r[k + db]
            if c:
                c = f.mul(c, lead_inv)
                q[k] = c
                for j, b in enumerate(other.coeffs):
                    if b:
                        r[k + j] ^= f.mul(c, b)
        return Poly(f, q), Poly(f, r[:db] if db > 0 else ())

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        if self.is_zero():
            return self
        return self.scale(self.field.inv(self.coeffs[-1]))

    def __call__(self, point):
        return poly_eval(self, point)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_powmod(base: Poly, exponent: int, modulus: Poly) -> Poly:
    """``base**exponent mod modulus`` by repeated squaring."""
    if modulus.is_zero():
        raise DomainError("zero modulus")
    if exponent < 0:
        raise DomainError("negative exponent")
    result = Poly.constant(base.field, 1) % modulus
    b = base % modulus
    while exponent:
        if exponent & 1:
            result = (result * b) % modulus
        b = (b * b) % modulus
        exponent >>= 1
    return result


def poly_eval(poly: Poly, point: int) -> int:
    """Horner evaluation at a field element."""
    mul = poly.field.mul
    acc = 0
    for c in reversed(poly.coeffs):
        acc = mul(acc, point) ^ c
    return acc


def is_irreducible(f: Poly) -> bool:
    """Rabin's test for a monic polynomial over GF(q)."""
    n = f.degree
    if n < 1:
        return False
    if n == 1:
        return True
    q = f.field.order
    x = Poly.x(f.field)

    def frobenius(k):
        # x^(q^k) mod f, raising to the q-th power k times
        y = x % f
        for _ in range(k):
            y = poly_powmod(y, q, f)
        return y

    if frobenius(n) != x % f:
        return False
    for r in prime_factors(n):
        g = poly_gcd(frobenius(n // r) - x, f)
        if g.degree != 0:
            return False
    return True


_GF2 = None


def _field_for_bits(b: int) -> BinaryField:
    global _GF2
    if b == 1:
        if _GF2 is None:
            _GF2 = BinaryField(1, 0b10)
        return _GF2
    return BinaryField(b)


def monic_polys(field: BinaryField, n: int):
    """Monic degree-n polynomials in lexicographic order (constant term least significant)."""
    q = field.order
    for code in range(q ** n):
        coeffs = []
        for _ in range(n):
            code, c = divmod(code, q)
            coeffs.append(c)
        yield Poly(field, coeffs + [1])


def find_irreducible(q_bits: int, n: int, field: BinaryField | None = None) -> Poly:
    """Lexicographically smallest monic irreducible polynomial of degree n over GF(2^q_bits)."""
    if n < 1:
        raise DomainError("degree must be >= 1")
    if field is None:
        field = _field_for_bits(q_bits)
    elif field.b != q_bits:
        raise DomainError("field does not match q_bits")
    for f in monic_polys(field, n):
        if is_irreducible(f):
            return f
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")
