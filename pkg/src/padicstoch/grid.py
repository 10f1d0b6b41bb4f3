"""Finite-level harmonic analysis on Q_p^d.

A :class:`GridFunction` is a complex-valued function supported in the box
B(0, p**M)^d and constant on cosets of (p**N Z_p)^d.  The coset
representatives along each axis are the exact rationals ``i / p**M`` for
``0 <= i < p**(M+N)``; coset addition is index addition mod p**(M+N), so the
additive-character Fourier transform is a cyclic DFT of length p**(M+N) per
axis and is evaluated by an FFT factored along the p-adic digit hierarchy.

Conventions:
  * Haar measure normalized by w(Z_p) = 1; each resolution coset weighs p**-N.
  * fourier: fhat(xi) = integral f(x) chi(x xi) w(dx); output levels swap
    (M, N) -> (N, M); fourier then inverse is the identity.
  * gamma_k is the non-Archimedean gamma function
    Gamma(u) = integral |z|^(u-1) chi(z) w(dz) = (1 - p^(u-1))/(1 - p^-u)
    by shell summation in analytic continuation; the conditionally convergent
    truncated shell integral is kept as a slow reference
    (:func:`gamma_k_by_shells`).
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from fractions import Fraction

import cmath
import math

import numpy as np

from .errors import PrimeMismatch, PoleError, RegionFinerThanResolution, SizeOverflow
from .padic import Ball, PAdicNumber

ENTRY_CAP = 1 << 24


def set_entry_cap(cap: int) -> None:
    global ENTRY_CAP
    ENTRY_CAP = int(cap)


def _axis_valuations(n_entries: int, p: int) -> np.ndarray:
    """v_p(i) for i in [0, n); v_p(0) stored as a large sentinel."""
    out = np.zeros(n_entries, dtype=np.int64)
    idx = np.arange(n_entries, dtype=np.int64)
    step = np.int64(p)
    k = 1
    while step < n_entries:
        out[idx % step == 0] = k  # later (larger) k overwrites
        step *= p
        k += 1
    out[0] = 10**9
    return out


@dataclass(frozen=True)
class GridFunction:
    """Complex function on Q_p^d at truncation levels (M, N).

    values has shape (p**(M+N),) * dim; entry index i along an axis stands
    for the coset ``i/p**M + p**N Z_p``.
    """

    prime: int
    dim: int
    support_exp: int
    resolution_exp: int
    values: np.ndarray

    def __post_init__(self):
        n = self.n_per_axis
        if n**self.dim > ENTRY_CAP:
            raise SizeOverflow(
                f"p^(d(M+N)) = {n ** self.dim} exceeds entry cap {ENTRY_CAP}"
            )
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (n,) * self.dim:
            raise ValueError(f"values shape {vals.shape} != {(n,) * self.dim}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- structure ---------------------------------------------------------

    @property
    def n_per_axis(self) -> int:
        return self.prime ** (self.support_exp + self.resolution_exp)

    @property
    def levels(self) -> tuple:
        return (self.support_exp, self.resolution_exp)

    def axis_reps(self) -> list:
        pM = self.prime**self.support_exp
        return [Fraction(i, pM) for i in range(self.n_per_axis)]

    def axis_valuations(self) -> np.ndarray:
        return _axis_valuations(self.n_per_axis, self.prime)

    def axis_norms(self) -> np.ndarray:
        """|i/p**M| per index; 0.0 at index 0."""
        v = self.axis_valuations()
        out = np.where(
            v >= 10**9,
            0.0,
            float(self.prime) ** (self.support_exp - v.astype(np.float64)),
        )
        return out

    def rep(self, idx) -> tuple:
        pM = self.prime**self.support_exp
        if np.isscalar(idx):
            idx = (int(idx),)
        return tuple(Fraction(int(i), pM) for i in idx)

    def coset_weight(self) -> float:
        return float(self.prime) ** (-self.dim * self.resolution_exp)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, p: int, d: int, M: int, N: int) -> "GridFunction":
        n = p ** (M + N)
        if n**d > ENTRY_CAP:
            raise SizeOverflow(f"p^(d(M+N)) = {n ** d} exceeds entry cap {ENTRY_CAP}")
        return cls(p, d, M, N, np.zeros((n,) * d, dtype=np.complex128))

    @classmethod
    def from_callable(cls, p: int, d: int, M: int, N: int, fn) -> "GridFunction":
        """fn maps a d-tuple of Fractions (coset representatives) to complex."""
        g = cls.zeros(p, d, M, N)
        vals = np.array(g.values, dtype=np.complex128)
        pM = p**M
        it = np.nditer(vals, flags=["multi_index"], op_flags=["writeonly"])
        for entry in it:
            point = tuple(Fraction(i, pM) for i in it.multi_index)
            entry[...] = fn(point)
        return cls(p, d, M, N, vals)

    @classmethod
    def indicator_ball(
        cls, p: int, d: int, M: int, N: int, center=None, radius_exp: int = 0
    ) -> "GridFunction":
        """Indicator of the coordinate ball B(center, p**radius_exp)^d."""
        if radius_exp < -N:
            raise RegionFinerThanResolution(
                f"radius exponent {radius_exp} below resolution -{N}"
            )
        base = cls.zeros(p, d, M, N)
        vals = np.array(base.values)
        mask = _ball_mask(base, center, radius_exp)
        vals[mask] = 1.0
        return cls(p, d, M, N, vals)

    @classmethod
    def delta_approx(cls, p: int, d: int, M: int, N: int) -> "GridFunction":
        """Normalized indicator of the finest coset at 0 (mass-1 delta stand-in)."""
        g = cls.zeros(p, d, M, N)
        vals = np.array(g.values)
        vals[(0,) * d] = float(p) ** (d * N)
        return cls(p, d, M, N, vals)

    # -- algebra -----------------------------------------------------------

    def _like(self, vals: np.ndarray) -> "GridFunction":
        return GridFunction(
            self.prime, self.dim, self.support_exp, self.resolution_exp, vals
        )

    def _compat(self, other: "GridFunction") -> None:
        if self.prime != other.prime:
            raise PrimeMismatch("grid primes differ")
        if (self.dim, self.levels) != (other.dim, other.levels):
            raise ValueError("grid levels/dimension differ")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._compat(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._compat(other)
        return self._like(self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._compat(other)
            return self._like(self.values * other.values)
        return self._like(self.values * other)

    __rmul__ = __mul__

    def translate(self, shift) -> "GridFunction":
        """Translate by a grid vector: (T_a f)(x) = f(x - a); a must be a
        tuple of rationals representable as i/p**M."""
        if not isinstance(shift, tuple):
            shift = (shift,)
        pM = self.prime**self.support_exp
        n = self.n_per_axis
        offsets = []
        for a in shift:
            t = Fraction(a) * pM
            if t.denominator != 1:
                raise RegionFinerThanResolution("shift finer than the grid")
            offsets.append(int(t) % n)
        vals = self.values
        for ax, off in enumerate(offsets):
            vals = np.roll(vals, off, axis=ax)
        return self._like(vals)

    def modulate(self, freq) -> "GridFunction":
        """Multiply by chi(a . x) for a on the dual grid (a_j = c_j/p**N).

        chi(a_j x_i) = exp(2 pi i (c_j i mod n) / n) with n = p**(M+N),
        evaluated with the exact rational phase.
        """
        if not isinstance(freq, tuple):
            freq = (freq,)
        n = self.n_per_axis
        vals = np.array(self.values)
        for ax, a in enumerate(freq):
            t = Fraction(a) * (self.prime**self.resolution_exp)
            if t.denominator != 1:
                raise RegionFinerThanResolution("modulation frequency off the dual grid")
            c = int(t) % n
            phase = np.exp(2j * np.pi * ((np.arange(n) * c) % n) / n)
            shape = [1] * self.dim
            shape[ax] = n
            vals = vals * phase.reshape(shape)
        return self._like(vals)

    def l2_norm(self) -> float:
        return float(
            np.sqrt(np.sum(np.abs(self.values) ** 2) * self.coset_weight())
        )

    def sup_diff(self, other: "GridFunction") -> float:
        self._compat(other)
        return float(np.max(np.abs(self.values - other.values)))

    # -- serialization -----------------------------------------------------

    _MAGIC = b"PGF1"

    def to_bytes(self) -> bytes:
        head = struct.pack(
            "<4siiii", self._MAGIC, self.prime, self.dim, self.support_exp, self.resolution_exp
        )
        return head + np.ascontiguousarray(self.values).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "GridFunction":
        magic, p, d, M, N = struct.unpack_from("<4siiii", blob)
        if magic != cls._MAGIC:
            raise ValueError("bad GridFunction binary header")
        n = p ** (M + N)
        vals = np.frombuffer(blob, dtype=np.complex128, offset=20).reshape((n,) * d)
        return cls(p, d, M, N, vals.copy())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["p", "d", "M", "N"])
        w.writerow([self.prime, self.dim, self.support_exp, self.resolution_exp])
        w.writerow(["flat_index", "re", "im"])
        flat = self.values.reshape(-1)
        for i, v in enumerate(flat):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        p, d, M, N = (int(x) for x in rows[1])
        n = p ** (M + N)
        flat = np.zeros(n**d, dtype=np.complex128)
        for row in rows[3:]:
            if not row:
                continue
            flat[int(row[0])] = float(row[1]) + 1j * float(row[2])
        return cls(p, d, M, N, flat.reshape((n,) * d))


def _ball_mask(g: GridFunction, center, radius_exp: int) -> np.ndarray:
    """Boolean mask of grid cosets inside the coordinate ball."""
    if radius_exp < -g.resolution_exp:
        raise RegionFinerThanResolution(
            f"radius exponent {radius_exp} below resolution -{g.resolution_exp}"
        )
    p, n = g.prime, g.n_per_axis
    pM = p**g.support_exp
    if center is None:
        center = (Fraction(0),) * g.dim
    if not isinstance(center, tuple):
        center = (center,)
    center = tuple(
        c.to_fraction() if isinstance(c, PAdicNumber) else Fraction(c) for c in center
    )
    # along one axis: |i/pM - c| <= p^k  <=>  v_p(i - c*pM) >= M - k
    mask = np.ones((n,) * g.dim, dtype=bool)
    vals = _axis_valuations(n, p)
    for ax, c in enumerate(center):
        t = c * pM
        if t.denominator != 1:
            raise RegionFinerThanResolution("ball center not on the grid")
        off = int(t) % n
        # v_p((i - off) mod n) with the convention v_p(0) = big
        idx = (np.arange(n) - off) % n
        vv = vals[idx]
        ax_mask = vv >= (g.support_exp - radius_exp)
        shape = [1] * g.dim
        shape[ax] = n
        mask &= ax_mask.reshape(shape)
    return mask


# ---------------------------------------------------------------------------
# integration, Fourier, convolution
# ---------------------------------------------------------------------------


def haar_integral(f: GridFunction, region: Ball | None = None) -> complex:
    """Exact coset-weighted Haar integral of f, optionally over a clopen ball.

    Translation invariant by construction (coset reindexing).
    """
    if region is None:
        return complex(np.sum(f.values) * f.coset_weight())
    mask = _ball_mask(f, region.center, region.radius_exponent)
    return complex(np.sum(f.values[mask]) * f.coset_weight())


def fourier(f: GridFunction, inverse: bool = False) -> GridFunction:
    """Additive-character Fourier transform relative to Haar measure.

    Forward:  fhat(xi) = integral f(x) chi(x xi) w(dx)
    Inverse:  g(x)     = integral f(xi) chi(-x xi) w(dxi)
    Output levels swap (M, N) -> (N, M).  Exact up to FFT roundoff.
    """
    p, d = f.prime, f.dim
    M, N = f.support_exp, f.resolution_exp
    if inverse:
        vals = np.fft.fftn(f.values) * float(p) ** (-d * N)
    else:
        vals = np.fft.ifftn(f.values) * float(p) ** (d * M)
    return GridFunction(p, d, N, M, vals)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Haar convolution (f*g)(x) = integral f(x-y) g(y) w(dy).

    Support does not grow (ultrametric), so the cyclic product is exact:
    fourier(convolve(f, g)) = fourier(f) * fourier(g).
    """
    f._compat(g)
    vals = np.fft.ifftn(np.fft.fftn(f.values) * np.fft.fftn(g.values))
    vals = vals * f.coset_weight()
    return f._like(vals)


# ---------------------------------------------------------------------------
# gamma function
# ---------------------------------------------------------------------------


def gamma_k(p: int, u: complex) -> complex:
    """Non-Archimedean gamma function by closed-form shell summation.

    Gamma(u) = (1 - p^(u-1)) / (1 - p^-u) in analytic continuation; poles on
    p^-u = 1 (u in 2 pi i Z / ln p, including u = 0).
    Satisfies Gamma(u) * Gamma(1-u) = 1 away from poles/zeros.
    """
    u = complex(u)
    lp = math.log(p)
    denom = 1.0 - cmath.exp(-u * lp)
    if abs(denom) < 1e-12:
        raise PoleError(f"gamma_k pole at u={u} (p^-u = 1)")
    return (1.0 - cmath.exp((u - 1.0) * lp)) / denom


def gamma_k_by_shells(p: int, u: complex, k_min: int = -64, k_max: int = 4) -> complex:
    """Truncated oscillatory shell integral of |z|^(u-1) chi(z).

    Reference path (slow, conditionally convergent): sums the exact integral
    over each sphere |z| = p^k for k_min <= k <= k_max.  On k <= 0 the
    character is identically 1 and the shell integral is p^(k u) (1 - 1/p);
    on k >= 1 it is p^(k(u-1)) times an explicit root-of-unity sum over the
    p^(k-1)(p-1) unit cosets, evaluated numerically.  Truncation error decays
    like p^(k_min * Re u), so Re u > 0 is required for convergence.
    """
    u = complex(u)
    lp = math.log(p)
    total = 0.0 + 0.0j
    for k in range(k_min, min(k_max, 0) + 1):
        total += cmath.exp(u * k * lp) * (1.0 - 1.0 / p)
    for k in range(1, k_max + 1):
        pk = p**k
        s = 0.0 + 0.0j
        for a in range(1, pk):
            if a % p == 0:
                continue
            s += cmath.exp(2j * math.pi * a / pk)
        total += cmath.exp((u - 1.0) * k * lp) * s
    return total


def windowed_power(
    p: int, M: int, N: int, u: complex, d: int = 1, axis: int = 0
) -> GridFunction:
    """|x_axis|^u restricted to the box B(0, p**M)^d; 0 on the zero coset."""
    g = GridFunction.zeros(p, d, M, N)
    norms = g.axis_norms()
    ax_vals = np.zeros(g.n_per_axis, dtype=np.complex128)
    pos = norms > 0
    ax_vals[pos] = np.exp(complex(u) * np.log(norms[pos].astype(np.complex128)))
    vals = np.ones((g.n_per_axis,) * d, dtype=np.complex128)
    shape = [1] * d
    shape[axis] = g.n_per_axis
    vals = vals * ax_vals.reshape(shape)
    return GridFunction(p, d, M, N, vals)
