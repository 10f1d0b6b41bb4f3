"""Antiderivation calculus, geodesics and the exponential map on chart
patches of Q_p^d.

Two function representations coexist:

* :class:`MahlerFunction` -- coefficients against the binomial basis
  binom(x, n) on Z_p.  Its canonical antiderivation is the basis shift
  binom(x, n) -> binom(x, n+1), the norm-1 right inverse of the forward
  difference f(x+1) - f(x).
* :class:`Curve` / :class:`PolyScalar` -- plain polynomials with exact
  p-adic coefficients.  The geodesic solver works here with the true
  derivative d/db and its monomial antiderivative b^n -> b^(n+1)/(n+1),
  whose operator norm on a degree-capped space is the explicit constant
  C = p^floor(log_p(cap+1)).

The solver uses the monomial route because the fixed-point equation must
satisfy the scaling law c_{aS}(b) = c_S(ab) and the second-order expansion
of the exponential map, both of which the unit-step difference calculus
destroys (binom(1, n) = 0 for n >= 2 collapses exp to a translation); the
shift antiderivation is kept as the public difference-calculus operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded, NoContraction, PrecisionExhausted, PrimeMismatch
from .padic import PAdicNumber, distance_bound, get_default_precision

# ||P|| = p^floor(log_p(cap+1)) enters the contraction certificate, so the
# cap trades admissible tangent radius against series length; converged
# series coefficients decay like ||S||^n and are dropped far below degree 23
# at every admissible tangent.
DEFAULT_DEGREE_CAP = 23


def _zero(p, w):
    return PAdicNumber.zero(p, w)


def _norm_f(x: PAdicNumber) -> float:
    return x.norm_float()


# ---------------------------------------------------------------------------
# univariate polynomials over Q_p (per coordinate)
# ---------------------------------------------------------------------------


@dataclass
class Poly1:
    """Sparse univariate polynomial with PAdicNumber coefficients."""

    prime: int
    coeffs: dict = field(default_factory=dict)

    def copy(self) -> "Poly1":
        return Poly1(self.prime, dict(self.coeffs))

    @property
    def degree(self) -> int:
        return max(self.coeffs, default=-1)

    def norm(self) -> float:
        return max((_norm_f(c) for c in self.coeffs.values()), default=0.0)

    def drop_below(self, threshold: float) -> "Poly1":
        return Poly1(
            self.prime,
            {n: c for n, c in self.coeffs.items() if _norm_f(c) > threshold},
        )

    def add(self, other: "Poly1") -> "Poly1":
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            if n in out:
                try:
                    s = out[n] + c
                except PrecisionExhausted:
                    # cancellation past the validity window: the true sum is
                    # below every tracked digit, consistent with drop_below
                    del out[n]
                    continue
                if s.is_zero:
                    del out[n]
                else:
                    out[n] = s
            else:
                out[n] = c
        return Poly1(self.prime, out)

    def neg(self) -> "Poly1":
        return Poly1(self.prime, {n: -c for n, c in self.coeffs.items()})

    def sub(self, other: "Poly1") -> "Poly1":
        return self.add(other.neg())

    def scale(self, a: PAdicNumber) -> "Poly1":
        if a.is_zero:
            return Poly1(self.prime)
        return Poly1(self.prime, {n: c * a for n, c in self.coeffs.items()})

    def mul(self, other: "Poly1", cap: int) -> "Poly1":
        out = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                if n > cap:
                    continue
                v = c1 * c2
                if n in out:
                    s = out[n] + v
                    if s.is_zero:
                        del out[n]
                    else:
                        out[n] = s
                elif not v.is_zero:
                    out[n] = v
        return Poly1(self.prime, out)

    def derivative(self) -> "Poly1":
        out = {}
        for n, c in self.coeffs.items():
            if n == 0:
                continue
            v = c * PAdicNumber.from_int(n, self.prime, c.precision)
            if not v.is_zero:
                out[n - 1] = v
        return Poly1(self.prime, out)

    def antiderivative(self) -> "Poly1":
        """Monomial antiderivative b^n -> b^(n+1)/(n+1), vanishing at 0."""
        out = {}
        for n, c in self.coeffs.items():
            out[n + 1] = c * PAdicNumber.from_int(n + 1, self.prime, c.precision).inverse()
        return Poly1(self.prime, out)

    def eval(self, b: PAdicNumber) -> PAdicNumber:
        w = get_default_precision()
        acc = _zero(self.prime, w)
        for n in sorted(self.coeffs):
            acc = acc + self.coeffs[n] * (b**n)
        return acc


def curve_zero(p: int, dim: int) -> tuple:
    return tuple(Poly1(p) for _ in range(dim))


def curve_add(a: tuple, b: tuple) -> tuple:
    return tuple(x.add(y) for x, y in zip(a, b))


def curve_sub(a: tuple, b: tuple) -> tuple:
    return tuple(x.sub(y) for x, y in zip(a, b))


def curve_norm(a: tuple) -> float:
    return max((x.norm() for x in a), default=0.0)


def curve_map(a: tuple, fn) -> tuple:
    return tuple(fn(x) for x in a)


def curve_eval(a: tuple, b: PAdicNumber) -> tuple:
    return tuple(x.eval(b) for x in a)


# ---------------------------------------------------------------------------
# multivariate polynomial scalars / maps on the chart
# ---------------------------------------------------------------------------


@dataclass
class PolyScalar:
    """Polynomial Q_p^d -> Q_p with exact coefficients, exponent-tuple keyed."""

    prime: int
    dim: int
    coeffs: dict = field(default_factory=dict)

    def norm(self) -> float:
        return max((_norm_f(c) for c in self.coeffs.values()), default=0.0)

    def eval(self, x: tuple) -> PAdicNumber:
        w = get_default_precision()
        acc = _zero(self.prime, w)
        for exps, c in self.coeffs.items():
            term = c
            for xi, e in zip(x, exps):
                if e:
                    term = term * (xi**e)
            acc = acc + term
        return acc

    def partial(self, j: int) -> "PolyScalar":
        out = {}
        for exps, c in self.coeffs.items():
            e = exps[j]
            if e == 0:
                continue
            v = c * PAdicNumber.from_int(e, self.prime, c.precision)
            if v.is_zero:
                continue
            new = list(exps)
            new[j] = e - 1
            out[tuple(new)] = v
        return PolyScalar(self.prime, self.dim, out)

    def compose_curve(self, curves: tuple, cap: int) -> "Poly1":
        """Substitute x_j = curves[j](b); returns a univariate polynomial."""
        p = self.prime
        out = Poly1(p)
        pow_cache = [dict() for _ in range(self.dim)]

        def cpow(j, e):
            if e == 0:
                return None
            if e not in pow_cache[j]:
                if e == 1:
                    pow_cache[j][1] = curves[j]
                else:
                    pow_cache[j][e] = cpow(j, e - 1).mul(curves[j], cap)
            return pow_cache[j][e]

        for exps, c in self.coeffs.items():
            term = Poly1(p, {0: c})
            for j, e in enumerate(exps):
                if e:
                    term = term.mul(cpow(j, e), cap)
            out = out.add(term)
        return out

    @classmethod
    def constant(cls, value: PAdicNumber, dim: int) -> "PolyScalar":
        out = cls(value.prime, dim)
        if not value.is_zero:
            out.coeffs[(0,) * dim] = value
        return out

    @classmethod
    def coordinate(cls, p: int, dim: int, j: int) -> "PolyScalar":
        exps = [0] * dim
        exps[j] = 1
        return cls(p, dim, {tuple(exps): PAdicNumber.one(p)})


@dataclass
class PolyMap:
    """Polynomial map Q_p^d -> Q_p^d (chart transitions, test functions)."""

    components: tuple  # PolyScalar per output coordinate

    @property
    def prime(self) -> int:
        return self.components[0].prime

    @property
    def dim(self) -> int:
        return len(self.components)

    def eval(self, x: tuple) -> tuple:
        return tuple(comp.eval(x) for comp in self.components)

    def jacobian_apply(self, x: tuple, u: tuple) -> tuple:
        """phi'(x) . u"""
        w = get_default_precision()
        out = []
        for comp in self.components:
            acc = _zero(self.prime, w)
            for j in range(self.dim):
                acc = acc + comp.partial(j).eval(x) * u[j]
            out.append(acc)
        return tuple(out)

    def hessian_apply(self, x: tuple, u: tuple, v: tuple) -> tuple:
        """phi''(x) . (u, v)"""
        w = get_default_precision()
        out = []
        for comp in self.components:
            acc = _zero(self.prime, w)
            for j in range(self.dim):
                pj = comp.partial(j)
                for l in range(self.dim):
                    acc = acc + pj.partial(l).eval(x) * u[j] * v[l]
            out.append(acc)
        return tuple(out)

    def coeff_norm(self) -> float:
        return max(comp.norm() for comp in self.components)

    def jacobian_coeff_norm(self) -> float:
        return max(
            comp.partial(j).norm()
            for comp in self.components
            for j in range(self.dim)
        )

    def compose_curves(self, curves: tuple, cap: int) -> tuple:
        return tuple(comp.compose_curve(curves, cap) for comp in self.components)


# ---------------------------------------------------------------------------
# Mahler functions and the shift antiderivation
# ---------------------------------------------------------------------------


def _binomial_value(x: PAdicNumber, n: int) -> PAdicNumber:
    """binom(x, n) evaluated exactly: x(x-1)...(x-n+1)/n!."""
    p, w = x.prime, x.precision
    if n == 0:
        return PAdicNumber.one(p, w)
    acc = x
    for i in range(1, n):
        acc = acc * (x - PAdicNumber.from_int(i, p, w))
    return acc * PAdicNumber.from_fraction(Fraction(1, math.factorial(n)), p, w)


def _stirling_first(n_max: int) -> list:
    """Signed Stirling numbers of the first kind, s[n][k]."""
    s = [[0] * (n_max + 1) for _ in range(n_max + 1)]
    s[0][0] = 1
    for n in range(1, n_max + 1):
        for k in range(n_max + 1):
            s[n][k] = (s[n - 1][k - 1] if k else 0) - (n - 1) * s[n - 1][k]
    return s


def _stirling_second(n_max: int) -> list:
    S = [[0] * (n_max + 1) for _ in range(n_max + 1)]
    S[0][0] = 1
    for n in range(1, n_max + 1):
        for k in range(1, n_max + 1):
            S[n][k] = k * S[n - 1][k] + S[n - 1][k - 1]
    return S


@dataclass
class MahlerFunction:
    """Function Z_p -> Q_p^d with coefficients against binom(x, n), n <= D.

    The Mahler basis has sup-norm 1, so the sup norm of a function is the
    max coefficient norm.  ``antiderive`` is the basis shift, the canonical
    norm-1 right inverse of the forward difference."""

    prime: int
    dim: int
    coeffs: list  # list over degree of d-tuples of PAdicNumber

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x: PAdicNumber) -> tuple:
        w = get_default_precision()
        acc = [_zero(self.prime, w) for _ in range(self.dim)]
        for n, c in enumerate(self.coeffs):
            bv = _binomial_value(x, n)
            for j in range(self.dim):
                acc[j] = acc[j] + c[j] * bv
        return tuple(acc)

    def antiderive(self) -> "MahlerFunction":
        """Basis shift binom(x, n) -> binom(x, n+1); vanishes at 0 and the
        forward difference of the result recovers the input exactly."""
        zero = tuple(_zero(self.prime, 0) for _ in range(self.dim))
        return MahlerFunction(self.prime, self.dim, [zero] + list(self.coeffs))

    def forward_difference(self) -> "MahlerFunction":
        """f(x+1) - f(x): shifts the basis down one degree."""
        if len(self.coeffs) <= 1:
            zero = tuple(_zero(self.prime, 0) for _ in range(self.dim))
            return MahlerFunction(self.prime, self.dim, [zero])
        return MahlerFunction(self.prime, self.dim, list(self.coeffs[1:]))

    def norm(self) -> float:
        return max(
            (max(_norm_f(c) for c in row) for row in self.coeffs), default=0.0
        )

    def to_curves(self) -> tuple:
        """Exact conversion to monomial polynomials (one per coordinate)."""
        D = self.degree()
        s = _stirling_first(max(D, 0))
        polys = []
        for j in range(self.dim):
            out = Poly1(self.prime)
            for n, row in enumerate(self.coeffs):
                c = row[j]
                if c.is_zero:
                    continue
                inv_fact = PAdicNumber.from_fraction(
                    Fraction(1, math.factorial(n)), self.prime, c.precision
                )
                for k in range(n + 1):
                    if s[n][k]:
                        term = c * inv_fact * PAdicNumber.from_int(
                            s[n][k], self.prime, c.precision
                        )
                        out = out.add(Poly1(self.prime, {k: term}))
            polys.append(out)
        return tuple(polys)

    @classmethod
    def from_curves(cls, curves: tuple) -> "MahlerFunction":
        """Exact conversion from monomial polynomials via x^n =
        sum_k S(n,k) k! binom(x, k)."""
        p = curves[0].prime
        D = max((c.degree for c in curves), default=0)
        D = max(D, 0)
        S = _stirling_second(D)
        dim = len(curves)
        rows = [
            [_zero(p, get_default_precision()) for _ in range(dim)]
            for _ in range(D + 1)
        ]
        for j, poly in enumerate(curves):
            for n, c in poly.coeffs.items():
                for k in range(n + 1):
                    if S[n][k]:
                        term = c * PAdicNumber.from_int(
                            S[n][k] * math.factorial(k), p, c.precision
                        )
                        rows[k][j] = rows[k][j] + term
        return cls(p, dim, [tuple(r) for r in rows])


def antiderive(f: MahlerFunction) -> MahlerFunction:
    """Module-level alias for the Mahler-shift antiderivation."""
    return f.antiderive()


# ---------------------------------------------------------------------------
# Christoffel fields
# ---------------------------------------------------------------------------


@dataclass
class ChristoffelField:
    """Chart-local bilinear-form field Gamma(x)(u, v), polynomial in x.

    ``table[(i, j, l)]`` is the PolyScalar coefficient of u_j v_l in output
    coordinate i; symmetry in (j, l) is enforced by symmetrizing at
    construction.  The reported norm bounds the bilinear operator norm over
    the unit chart ball by the ultrametric coefficient estimate."""

    chart_id: str
    prime: int
    dim: int
    table: dict = field(default_factory=dict)

    def __post_init__(self):
        sym = {}
        for (i, j, l), poly in self.table.items():
            if j > l:
                key = (i, l, j)
            else:
                key = (i, j, l)
            if key in sym:
                merged = PolyScalar(self.prime, self.dim, dict(sym[key].coeffs))
                for exps, c in poly.coeffs.items():
                    if exps in merged.coeffs:
                        ssum = merged.coeffs[exps] + c
                        if ssum.is_zero:
                            del merged.coeffs[exps]
                        else:
                            merged.coeffs[exps] = ssum
                    else:
                        merged.coeffs[exps] = c
                sym[key] = merged
            else:
                sym[key] = poly
        self.table = sym

    def is_zero(self) -> bool:
        return all(p.norm() == 0.0 for p in self.table.values())

    def norm(self) -> float:
        """Upper bound of ||Gamma|| on the unit chart ball (max coefficient
        norm; |x^alpha| <= 1 there)."""
        return max((poly.norm() for poly in self.table.values()), default=0.0)

    def _entry(self, i, j, l):
        if j > l:
            j, l = l, j
        return self.table.get((i, j, l))

    def apply_point(self, x: tuple, u: tuple, v: tuple) -> tuple:
        w = get_default_precision()
        out = []
        for i in range(self.dim):
            acc = _zero(self.prime, w)
            for j in range(self.dim):
                for l in range(self.dim):
                    poly = self._entry(i, j, l)
                    if poly is None:
                        continue
                    acc = acc + poly.eval(x) * u[j] * v[l]
            out.append(acc)
        return tuple(out)

    def apply_curves(self, c: tuple, u: tuple, v: tuple, cap: int) -> tuple:
        out = []
        for i in range(self.dim):
            acc = Poly1(self.prime)
            for j in range(self.dim):
                for l in range(self.dim):
                    poly = self._entry(i, j, l)
                    if poly is None:
                        continue
                    coeff_curve = poly.compose_curve(c, cap)
                    acc = acc.add(coeff_curve.mul(u[j], cap).mul(v[l], cap))
            out.append(acc)
        return tuple(out)

    @classmethod
    def zero(cls, chart_id: str, p: int, dim: int) -> "ChristoffelField":
        return cls(chart_id, p, dim, {})

    @classmethod
    def constant(cls, chart_id: str, p: int, dim: int, entries: dict) -> "ChristoffelField":
        """entries maps (i, j, l) to a Fraction/int constant."""
        table = {}
        for key, val in entries.items():
            table[key] = PolyScalar.constant(
                PAdicNumber.from_fraction(Fraction(val), p), dim
            )
        return cls(chart_id, p, dim, table)


# ---------------------------------------------------------------------------
# geodesic solver
# ---------------------------------------------------------------------------


@dataclass
class GeodesicResult:
    """Solved geodesic c(b) = x0 + b y + P^2 f for the rescaled tangent
    y = p^scale_exp * y0, valid for |b| <= p^-scale_exp via the scaling law
    c_S(b) = c_{aS}(b / a)."""

    prime: int
    dim: int
    x0: tuple
    y0: tuple
    scale_exp: int
    series: tuple  # Curve for the rescaled tangent
    contraction: float
    deltas: list
    residual: float
    iterations: int

    @property
    def domain_radius_exp(self) -> int:
        return -self.scale_exp

    def eval(self, b) -> tuple:
        if not isinstance(b, PAdicNumber):
            b = PAdicNumber.from_fraction(Fraction(b), self.prime)
        if b.norm_float() > float(self.prime) ** (-self.scale_exp):
            raise NoContraction(
                f"argument outside the certified domain |b| <= p^{-self.scale_exp}"
            )
        return curve_eval(self.series, b.scale_by_p(self.scale_exp))

    def velocity(self, b) -> tuple:
        if not isinstance(b, PAdicNumber):
            b = PAdicNumber.from_fraction(Fraction(b), self.prime)
        scaled = b.scale_by_p(self.scale_exp)
        vel = curve_map(self.series, lambda q: q.derivative())
        raw = curve_eval(vel, scaled)
        # chain rule: d/db c(p^k b) = p^k c'(p^k b)
        return tuple(x.scale_by_p(self.scale_exp) for x in raw)

    def observed_ratio(self) -> float:
        ratios = [
            b / a for a, b in zip(self.deltas, self.deltas[1:]) if a > 0 and b > 0
        ]
        return max(ratios, default=0.0)


def _p_operator_norm(p: int, cap: int) -> float:
    """||P|| on the degree-capped monomial space: max |1/(n+1)|_p."""
    k = 0
    n = cap + 1
    while n >= p:
        n //= p
        k += 1
    return float(p) ** k


def geodesic_solve(
    gamma: ChristoffelField,
    x0: tuple,
    y0: tuple,
    budget: int = 60,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> GeodesicResult:
    """Fixed-point solution of f + Gamma(c)(c', c') = 0, c = x0 + b y + P^2 f.

    The contraction certificate is kappa = ||Gamma|| C eps max(C eps, 1) < 1
    with C = ||P|| on the capped space and eps = ||y||; when it fails for
    y = y0 the tangent is rescaled by the smallest power p^-k that restores
    it, and the returned series covers |b| <= p^-k by the exact scaling law.
    Convergence target: successive-iterate sup norm below p^-(W-2).
    """
    p, dim = gamma.prime, gamma.dim
    w = get_default_precision()
    if any(x.prime != p for x in x0) or any(y.prime != p for y in y0):
        raise PrimeMismatch("chart data and initial conditions use different primes")
    gnorm = gamma.norm()
    cap_norm = _p_operator_norm(p, degree_cap)
    eps0 = max((y.norm_float() for y in y0), default=0.0)

    def kappa(eps: float) -> float:
        return gnorm * cap_norm * eps * max(cap_norm * eps, 1.0)

    scale = 0
    if gnorm > 0.0 and eps0 > 0.0:
        while kappa(eps0 * float(p) ** (-scale)) >= 1.0:
            scale += 1
            if scale > 4 * w:
                raise NoContraction(
                    "no rescaling achieves the contraction certificate"
                )
    y = tuple(v.scale_by_p(scale) for v in y0)
    contraction = kappa(eps0 * float(p) ** (-scale)) if eps0 > 0 else 0.0

    line = tuple(
        Poly1(p, {k: v for k, v in [(0, x0[j]), (1, y[j])] if not v.is_zero})
        for j in range(dim)
    )
    drop = float(p) ** (-(w + 6))
    target = float(p) ** (-(w - 2))
    f = curve_zero(p, dim)
    deltas = []
    for it in range(budget):
        pf = curve_map(f, lambda q: q.antiderivative())
        p2f = curve_map(pf, lambda q: q.antiderivative())
        c = curve_add(line, p2f)
        cdot = curve_add(
            tuple(Poly1(p, {0: y[j]} if not y[j].is_zero else {}) for j in range(dim)),
            pf,
        )
        f_next = tuple(q.neg() for q in gamma.apply_curves(c, cdot, cdot, degree_cap))
        f_next = curve_map(f_next, lambda q: q.drop_below(drop))
        delta = curve_norm(curve_sub(f_next, f))
        deltas.append(delta)
        f = f_next
        if delta <= target:
            break
    else:
        raise BudgetExceeded(
            f"geodesic iteration did not reach {target} within {budget} steps"
        )
    pf = curve_map(f, lambda q: q.antiderivative())
    p2f = curve_map(pf, lambda q: q.antiderivative())
    c = curve_add(line, p2f)
    cdot = curve_add(
        tuple(Poly1(p, {0: y[j]} if not y[j].is_zero else {}) for j in range(dim)),
        pf,
    )
    residual = curve_norm(
        curve_add(f, gamma.apply_curves(c, cdot, cdot, degree_cap))
    )
    return GeodesicResult(
        p, dim, x0, y0, scale, c, contraction, deltas, residual, len(deltas)
    )


def exp_map(gamma: ChristoffelField, x0: tuple, tangent: tuple) -> tuple:
    """Exponential map: the geodesic with initial tangent S evaluated at 1.

    Requires S inside the admissible radius (no rescaling), since the
    rescaled series only covers |b| <= p^-k < 1."""
    res = geodesic_solve(gamma, x0, tangent)
    if res.scale_exp > 0:
        raise NoContraction(
            "tangent outside the admissible radius of the exponential map "
            f"(rescale exponent {res.scale_exp})"
        )
    return res.eval(1)


# ---------------------------------------------------------------------------
# charts, atlases, compatibility
# ---------------------------------------------------------------------------


@dataclass
class Chart:
    chart_id: str
    center: tuple  # PAdicNumber per coordinate
    radius_exp: int


@dataclass
class ChartAtlas:
    """One or two charts with polynomial transition maps.

    ``transitions[(j, l)]`` maps chart-j coordinates to chart-l coordinates
    on the overlap; uniformity requires sup-norm bounds C on transitions and
    their derivatives (coefficient-norm estimate) and round-trip inversion
    accuracy at working precision."""

    charts: tuple
    transitions: dict
    uniformity_constant: float

    def check_uniformity(self) -> bool:
        for tr in self.transitions.values():
            if tr.coeff_norm() > self.uniformity_constant:
                return False
            if tr.jacobian_coeff_norm() > self.uniformity_constant:
                return False
        return True

    def check_roundtrip(self, points, tol: float) -> bool:
        for (j, l), tr in self.transitions.items():
            back = self.transitions.get((l, j))
            if back is None:
                continue
            for x in points:
                rt = back.eval(tr.eval(x))
                err = max(distance_bound(a, b) for a, b in zip(rt, x))
                if err > tol:
                    return False
        return True


@dataclass(frozen=True)
class CompatReport:
    max_residual: float
    tolerance: float
    passed: bool
    geodesic_agreement: float | None = None


def transition_compat_check(
    transition: PolyMap,
    gamma_src: ChristoffelField,
    gamma_dst: ChristoffelField,
    points,
    vectors,
    tol: float | None = None,
) -> CompatReport:
    """Residual of the Christoffel transformation law at sample points:

        phi'(x) . Gamma_src(x)(u, v) - phi''(x)(u, v)
            - Gamma_dst(phi(x))(phi'(x) u, phi'(x) v)

    must vanish; the check reports the max norm over points x and vector
    pairs (u, v)."""
    p = transition.prime
    w = get_default_precision()
    if tol is None:
        tol = float(p) ** (-(w - 4))
    worst = 0.0
    for x in points:
        fx = transition.eval(x)
        for u, v in vectors:
            lhs = transition.jacobian_apply(x, gamma_src.apply_point(x, u, v))
            hess = transition.hessian_apply(x, u, v)
            du = transition.jacobian_apply(x, u)
            dv = transition.jacobian_apply(x, v)
            rhs = gamma_dst.apply_point(fx, du, dv)
            for i in range(transition.dim):
                target = hess[i] + rhs[i]
                worst = max(worst, distance_bound(lhs[i], target))
    return CompatReport(worst, tol, worst <= tol)


def geodesic_agreement_check(
    transition: PolyMap,
    gamma_src: ChristoffelField,
    gamma_dst: ChristoffelField,
    x0: tuple,
    y0: tuple,
    sample_args,
    tol: float | None = None,
) -> CompatReport:
    """Solve the geodesic in the source chart, push through the transition,
    and compare against the destination-chart geodesic started at the
    transported initial conditions."""
    p = transition.prime
    w = get_default_precision()
    if tol is None:
        tol = float(p) ** (-(w - 4))
    res_src = geodesic_solve(gamma_src, x0, y0)
    x0_dst = transition.eval(x0)
    y0_dst = transition.jacobian_apply(x0, y0)
    res_dst = geodesic_solve(gamma_dst, x0_dst, y0_dst)
    worst = 0.0
    for b in sample_args:
        lhs = transition.eval(res_src.eval(b))
        rhs = res_dst.eval(b)
        worst = max(worst, max(distance_bound(a, c) for a, c in zip(lhs, rhs)))
    return CompatReport(worst, tol, worst <= tol, worst)
