"""Exact arithmetic in Q_p at fixed working precision.

A number is stored as ``p**valuation * unit`` where the unit part is kept to
``W`` base-p digits with a nonzero leading digit.  Every stored value is an
exact rational representative of its p-adic ball of radius
``p**(valuation - W)``; arithmetic is exact on representatives and truncates
back to ``W`` digits, so all truncation errors are ``O(p**(valuation - W))``.

The module also provides the standard additive character
``chi(y) = exp(2*pi*i*{y}_p)`` (with an exact rational phase), the
multiplicative characters ``|x|**(a-1) * pi0(x*|x|)``, and clopen balls.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DivisionByZero, PrecisionExhausted, PrimeMismatch

DEFAULT_PRECISION = 32

_TWO_PI = 2.0 * math.pi


def set_default_precision(w: int) -> None:
    """Set the global working precision W (number of base-p digits)."""
    global DEFAULT_PRECISION
    if w < 4:
        raise ValueError(f"working precision must be >= 4, got {w}")
    DEFAULT_PRECISION = w


def get_default_precision() -> int:
    return DEFAULT_PRECISION


def padic_valuation(n: int, p: int) -> int:
    """v_p(n) for a nonzero integer n."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdicNumber:
    """Element of Q_p at working precision W.

    ``unit == 0`` encodes the exact zero; otherwise ``0 < unit < p**precision``
    with ``unit % prime != 0`` and the represented value is
    ``prime**val_exp * unit``.

    ``precision`` counts the number of VALID base-p digits: the true value
    lies in ``p**val_exp (unit + p**precision Z_p)``.  Fresh constructions
    carry the working precision W; additive cancellation of k digits leaves
    ``W - k`` valid digits, tracked conservatively, and an operation whose
    result would keep fewer than one valid digit raises PrecisionExhausted.
    """

    prime: int
    val_exp: int
    unit: int
    precision: int = field(default=0)

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError(f"prime must be >= 2, got {self.prime}")
        if self.precision == 0:
            object.__setattr__(self, "precision", DEFAULT_PRECISION)
        w = self.precision
        if self.unit == 0:
            object.__setattr__(self, "val_exp", 0)
            return
        if not (0 < self.unit < self.prime**w):
            raise ValueError("unit out of range for working precision")
        if self.unit % self.prime == 0:
            raise ValueError("unit part must have nonzero leading digit")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, p: int, precision: int = 0) -> "PAdicNumber":
        return cls(p, 0, 0, precision)

    @classmethod
    def one(cls, p: int, precision: int = 0) -> "PAdicNumber":
        return cls(p, 0, 1, precision)

    @classmethod
    def from_int(cls, n: int, p: int, precision: int = 0) -> "PAdicNumber":
        return cls.from_fraction(Fraction(n), p, precision)

    @classmethod
    def from_fraction(cls, r: Fraction | int, p: int, precision: int = 0) -> "PAdicNumber":
        r = Fraction(r)
        if r == 0:
            return cls.zero(p, precision)
        w = precision or DEFAULT_PRECISION
        num, den = r.numerator, r.denominator
        vn = padic_valuation(num, p)
        vd = padic_valuation(den, p)
        mod = p**w
        nu = num // p**vn
        du = den // p**vd
        unit = (nu * pow(du, -1, mod)) % mod
        if unit == 0:  # |num unit| >= p**w, fully truncated
            raise PrecisionExhausted("value indistinguishable from 0 at precision")
        return cls(p, vn - vd, unit, w)

    @classmethod
    def from_digits(cls, p: int, val_exp: int, digits, precision: int = 0) -> "PAdicNumber":
        """Little-endian base-p digits of the unit part."""
        w = precision or DEFAULT_PRECISION
        unit = 0
        for i, d in enumerate(digits):
            if not (0 <= d < p):
                raise ValueError(f"digit {d} out of range for p={p}")
            unit += d * p**i
        if unit == 0:
            return cls.zero(p, w)
        return cls(p, val_exp, unit % p**w, w)

    @classmethod
    def parse(cls, text: str, precision: int = 0) -> "PAdicNumber":
        """Parse the textual literal ``p:val:d0d1d2...`` (digits little-endian).

        Zero is written ``p:inf:0``.  For p >= 10 the digits are
        comma-separated.
        """
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"bad p-adic literal {text!r}")
        p = int(parts[0])
        if parts[1] in ("inf", "+inf"):
            return cls.zero(p, precision)
        val = int(parts[1])
        raw = parts[2]
        if "," in raw:
            digits = [int(c) for c in raw.split(",")]
        else:
            digits = [int(c) for c in raw]
        return cls.from_digits(p, val, digits, precision)

    # -- views -------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def valuation(self):
        """ord_p of the value; +inf for zero."""
        return math.inf if self.unit == 0 else self.val_exp

    @property
    def unit_digits(self) -> tuple:
        """Little-endian base-p digits of the unit part (length W)."""
        u, out = self.unit, []
        for _ in range(self.precision):
            u, d = divmod(u, self.prime)
            out.append(d)
        return tuple(out)

    def norm(self) -> Fraction:
        """|x|_p = p**(-valuation) as an exact rational; 0 for zero."""
        if self.unit == 0:
            return Fraction(0)
        v = self.val_exp
        return Fraction(1, self.prime**v) if v >= 0 else Fraction(self.prime ** (-v))

    def norm_float(self) -> float:
        return 0.0 if self.unit == 0 else float(self.prime) ** (-self.val_exp)

    def to_fraction(self) -> Fraction:
        """Exact rational value of the stored representative."""
        if self.unit == 0:
            return Fraction(0)
        v = self.val_exp
        if v >= 0:
            return Fraction(self.unit * self.prime**v)
        return Fraction(self.unit, self.prime ** (-v))

    def literal(self) -> str:
        """Textual literal ``p:val:d0d1d2...`` with trailing zero digits dropped."""
        if self.unit == 0:
            return f"{self.prime}:inf:0"
        digits = list(self.unit_digits)
        while len(digits) > 1 and digits[-1] == 0:
            digits.pop()
        if self.prime < 10:
            body = "".join(str(d) for d in digits)
        else:
            body = ",".join(str(d) for d in digits)
        return f"{self.prime}:{self.val_exp}:{body}"

    def __repr__(self):
        return f"PAdicNumber({self.literal()!r})"

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "PAdicNumber") -> None:
        if self.prime != other.prime:
            raise PrimeMismatch(f"primes differ: {self.prime} vs {other.prime}")

    def __add__(self, other: "PAdicNumber") -> "PAdicNumber":
        self._check(other)
        if self.unit == 0:
            return other
        if other.unit == 0:
            return self
        p = self.prime
        a, b = self, other
        if a.val_exp > b.val_exp:
            a, b = b, a
        shift = b.val_exp - a.val_exp
        if (
            shift == 0
            and a.precision == b.precision
            and a.unit + b.unit == p**a.precision
        ):
            return PAdicNumber.zero(p, a.precision)  # exact complements
        # both operands exact modulo p^(val + precision); relative to p^(a.val)
        err_exp = min(a.precision, shift + b.precision)
        if shift >= a.precision:
            return a  # b sits entirely below a's validity window
        s = a.unit + b.unit * p**shift
        if s == 0:
            return PAdicNumber.zero(p, min(a.precision, b.precision))
        k = padic_valuation(s, p)
        valid = err_exp - k
        if valid < 1:
            raise PrecisionExhausted(
                "cancellation left fewer than 1 significant digit"
            )
        unit = (s // p**k) % p**valid
        return PAdicNumber(p, a.val_exp + k, unit, valid)

    def __neg__(self) -> "PAdicNumber":
        if self.unit == 0:
            return self
        mod = self.prime**self.precision
        return PAdicNumber(self.prime, self.val_exp, mod - self.unit, self.precision)

    def __sub__(self, other: "PAdicNumber") -> "PAdicNumber":
        self._check(other)
        if self.val_exp == other.val_exp and self.unit == other.unit:
            return PAdicNumber.zero(self.prime, min(self.precision, other.precision))
        return self + (-other)

    def __mul__(self, other: "PAdicNumber") -> "PAdicNumber":
        self._check(other)
        w = min(self.precision, other.precision)  # relative errors dominate
        if self.unit == 0 or other.unit == 0:
            return PAdicNumber.zero(self.prime, w)
        mod = self.prime**w
        return PAdicNumber(
            self.prime,
            self.val_exp + other.val_exp,
            (self.unit * other.unit) % mod,
            w,
        )

    def inverse(self) -> "PAdicNumber":
        if self.unit == 0:
            raise DivisionByZero("inverse of 0")
        mod = self.prime**self.precision
        return PAdicNumber(
            self.prime, -self.val_exp, pow(self.unit, -1, mod), self.precision
        )

    def __truediv__(self, other: "PAdicNumber") -> "PAdicNumber":
        return self * other.inverse()

    def __pow__(self, n: int) -> "PAdicNumber":
        if n < 0:
            return self.inverse() ** (-n)
        out = PAdicNumber.one(self.prime, self.precision)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale_by_p(self, k: int) -> "PAdicNumber":
        """Multiply by p**k (exact)."""
        if self.unit == 0:
            return self
        return PAdicNumber(self.prime, self.val_exp + k, self.unit, self.precision)


# ---------------------------------------------------------------------------
# fractional part and characters
# ---------------------------------------------------------------------------


def distance_bound(x: PAdicNumber, y: PAdicNumber) -> float:
    """Upper bound on |x - y| usable across precision windows.

    Returns the exact norm of the difference when representable; when the
    difference cancels past the common validity window it returns the
    window bound p^-min(val + precision) instead of raising."""
    try:
        return (x - y).norm_float()
    except PrecisionExhausted:
        p = x.prime
        bound_exp = min(x.val_exp + x.precision, y.val_exp + y.precision)
        return float(p) ** (-bound_exp)


def frac_part(y) -> Fraction:
    """p-adic fractional part {y}_p = sum_{l<0} a_l p^l, an exact rational in [0,1).

    Accepts a PAdicNumber, or a Fraction/int together with ``p=``
    via :func:`frac_part_fraction`.
    """
    if not isinstance(y, PAdicNumber):
        raise TypeError("frac_part expects a PAdicNumber; see frac_part_fraction")
    if y.unit == 0 or y.val_exp >= 0:
        return Fraction(0)
    p = y.prime
    k = -y.val_exp
    if k >= y.precision:
        # every stored digit sits below p^0
        return Fraction(y.unit % p**k, p**k) if k <= y.precision else Fraction(0)
    return Fraction(y.unit % p**k, p**k)


def frac_part_fraction(r: Fraction | int, p: int) -> Fraction:
    """{r}_p for an exact rational r (any denominator).

    Writes r = a / (p**k * m) with gcd(m, p) = 1 and returns
    ``((a * m^{-1}) mod p**k) / p**k``.
    """
    r = Fraction(r)
    if r == 0:
        return Fraction(0)
    den = r.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    if k == 0:
        return Fraction(0)
    pk = p**k
    a = r.numerator * pow(den, -1, pk)
    return Fraction(a % pk, pk)


def char_phase(y) -> Fraction:
    """Exact rational phase of the additive character: chi(y) = e^{2 pi i phase}."""
    return frac_part(y)


def char_chi(y) -> complex:
    """Standard additive character chi(y) = exp(2 pi i {y}_p) on the unit circle."""
    ph = frac_part(y)
    if ph == 0:
        return 1.0 + 0.0j
    return cmath.exp(1j * _TWO_PI * float(ph))


def char_chi_fraction(r: Fraction | int, p: int) -> complex:
    ph = frac_part_fraction(r, p)
    if ph == 0:
        return 1.0 + 0.0j
    return cmath.exp(1j * _TWO_PI * float(ph))


def dot(z: tuple, x: tuple) -> PAdicNumber:
    """Componentwise dot product sum_j z_j x_j in Q_p."""
    if len(z) != len(x):
        raise ValueError("dimension mismatch")
    acc = None
    for zj, xj in zip(z, x):
        term = zj * xj
        acc = term if acc is None else acc + term
    return acc


def _primitive_root(p: int) -> int:
    """Smallest primitive root mod p (p an odd prime)."""
    phi = p - 1
    factors = set()
    m = phi
    d = 2
    while d * d <= m:
        while m % d == 0:
            factors.add(d)
            m //= d
        d += 1
    if m > 1:
        factors.add(m)
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in factors):
            return g
    raise ValueError(f"{p} is not prime")


@dataclass(frozen=True)
class UnitCharacter:
    """Character of the unit sphere S_1 of Q_p.

    Supported options: the trivial character and tame characters factoring
    through (Z/pZ)^*, indexed by ``k`` mod (p-1): the unit u with leading
    digit d0 maps to exp(2 pi i k ind(d0) / (p-1)) for a fixed primitive
    root.  Wilder characters are rejected.
    """

    prime: int
    index: int = 0

    def __post_init__(self):
        if self.index % (self.prime - 1) != self.index:
            object.__setattr__(self, "index", self.index % (self.prime - 1))

    @property
    def is_trivial(self) -> bool:
        return self.index == 0

    def __call__(self, x: PAdicNumber) -> complex:
        if x.is_zero:
            raise ValueError("unit character undefined at 0")
        if self.index == 0:
            return 1.0 + 0.0j
        p = self.prime
        d0 = x.unit % p
        g = _primitive_root(p)
        # discrete log of d0 base g in (Z/pZ)^*
        val, ind = 1, 0
        while val != d0:
            val = (val * g) % p
            ind += 1
        return cmath.exp(1j * _TWO_PI * self.index * ind / (p - 1))


def mult_character(a: complex, x: PAdicNumber, pi0: UnitCharacter | None = None) -> complex:
    """Multiplicative character pi_a(x) = |x|^(a-1) * pi0(x |x|).

    Extended by pi_a(0) = 0.  For Re(a) <= 1 that extension is discontinuous
    at 0; the value is still returned.  ``pi0`` defaults to the trivial
    character; x|x| is the unit part of x, which lies on the unit sphere.
    """
    if x.is_zero:
        return 0.0 + 0.0j
    mod = float(x.prime) ** (-x.val_exp)  # |x|
    power = complex(a) - 1.0
    radial = cmath.exp(power * math.log(mod)) if mod != 1.0 else 1.0 + 0.0j
    if pi0 is None or pi0.is_trivial:
        return radial
    if pi0.prime != x.prime:
        raise PrimeMismatch("unit character prime differs from argument prime")
    unit_part = PAdicNumber(x.prime, 0, x.unit, x.precision)
    return radial * pi0(unit_part)


# ---------------------------------------------------------------------------
# balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    """Clopen ball B(center, p**radius_exponent) in Q_p (or a coordinate ball
    in Q_p^d when center is a tuple).

    Ultrametric geometry: two balls are either disjoint or nested, and every
    point of a ball is a center.
    """

    center: object  # PAdicNumber or tuple of PAdicNumber
    radius_exponent: int

    def _centers(self) -> tuple:
        c = self.center
        return c if isinstance(c, tuple) else (c,)

    @property
    def prime(self) -> int:
        return self._centers()[0].prime

    def contains(self, x) -> bool:
        xs = x if isinstance(x, tuple) else (x,)
        cs = self._centers()
        if len(xs) != len(cs):
            raise ValueError("dimension mismatch")
        r = Fraction(self.prime) ** self.radius_exponent
        return all((xj - cj).norm() <= r for xj, cj in zip(xs, cs))

    def is_disjoint_from(self, other: "Ball") -> bool:
        """Disjointness test; by ultrametricity the only alternative is nesting."""
        if self.prime != other.prime:
            raise PrimeMismatch("balls over different primes")
        big = max(self.radius_exponent, other.radius_exponent)
        r = Fraction(self.prime) ** big
        cs, co = self._centers(), other._centers()
        return any((a - b).norm() > r for a, b in zip(cs, co))

    def is_nested_with(self, other: "Ball") -> bool:
        return not self.is_disjoint_from(other)

    def norm_constant(self) -> bool:
        """True when |x| is constant on the ball (ball avoids 0)."""
        cs = self._centers()
        r = Fraction(self.prime) ** self.radius_exponent
        return all(c.norm() > r for c in cs)
