"""q-Gaussian measures on Q_p^d and the q-Wiener process with real time.

A q-Gaussian measure is specified by its characteristic functional
``exp(-B(v_q(z), v_q(z))) * chi(z . shift)`` with ``v_q(z)_j = |z_j|^(q/2)``
and B a symmetric nonnegative real d x d form.  Densities are realized as
GridFunctions by inverse Fourier transform; sampling is exact inverse-CDF
over the coset partition with optional uniform refinement inside the finest
coset.

Moment caveat: |x|-power moments of order >= q diverge with the truncation
radius (the density has |x|^(-q-1) tails), so every numeric moment reports
its truncation level; see :func:`moment_numeric`.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateCorrelation
from .grid import GridFunction, fourier
from .padic import PAdicNumber, frac_part_fraction

_TWO_PI = 2.0 * math.pi


def _as_fraction_shift(shift, d):
    if shift is None:
        return (Fraction(0),) * d
    out = []
    for s in shift:
        out.append(s.to_fraction() if isinstance(s, PAdicNumber) else Fraction(s))
    if len(out) != d:
        raise ValueError("shift dimension mismatch")
    return tuple(out)


@dataclass(frozen=True)
class QGaussianSpec:
    """Parameters and realization levels of a q-Gaussian measure."""

    q: float
    correlation: np.ndarray
    prime: int
    support_exp: int
    resolution_exp: int
    shift: tuple | None = None

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.correlation, dtype=float))
        if B.shape[0] != B.shape[1]:
            raise ValueError("correlation must be square")
        if not np.allclose(B, B.T, atol=1e-12):
            raise ValueError("correlation must be symmetric")
        if np.linalg.eigvalsh(B).min() < -1e-12:
            raise ValueError("correlation must be nonnegative definite")
        if self.q <= 0:
            raise ValueError("q must be positive")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "correlation", B)
        object.__setattr__(
            self, "shift", _as_fraction_shift(self.shift, B.shape[0]) if self.shift else None
        )

    @property
    def dim(self) -> int:
        return self.correlation.shape[0]

    def with_correlation(self, B) -> "QGaussianSpec":
        return QGaussianSpec(
            self.q, B, self.prime, self.support_exp, self.resolution_exp, self.shift
        )

    def spec_hash(self) -> str:
        payload = json.dumps(
            {
                "q": self.q,
                "B": np.asarray(self.correlation).tolist(),
                "p": self.prime,
                "M": self.support_exp,
                "N": self.resolution_exp,
                "shift": [str(s) for s in self.shift] if self.shift else None,
            },
            sort_keys=True,
        )
        import hashlib

        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def v_q(z, q: float) -> np.ndarray:
    """Componentwise |z_j|^(q/2) of a point of Q_p^d.

    Accepts a tuple of PAdicNumber or a float array of moduli.
    """
    if isinstance(z, tuple) and z and isinstance(z[0], PAdicNumber):
        mods = np.array([zj.norm_float() for zj in z])
    else:
        mods = np.asarray(z, dtype=float)
    return mods ** (q / 2.0)


def char_functional(spec: QGaussianSpec, z: tuple) -> complex:
    """Characteristic functional exp(-v B v) chi(z . shift) at a point z."""
    v = v_q(z, spec.q)
    quad = float(v @ spec.correlation @ v)
    phase = Fraction(0)
    if spec.shift is not None:
        for zj, gj in zip(z, spec.shift):
            zf = zj.to_fraction() if isinstance(zj, PAdicNumber) else Fraction(zj)
            phase += zf * gj
    ph = frac_part_fraction(phase, spec.prime)
    return math.exp(-quad) * cmath.exp(1j * _TWO_PI * float(ph))


def _char_functional_grid(spec: QGaussianSpec) -> GridFunction:
    """Characteristic functional sampled on the dual grid (levels (N, M))."""
    p, d = spec.prime, spec.dim
    M, N = spec.support_exp, spec.resolution_exp
    probe = GridFunction.zeros(p, d, N, M)
    mods = probe.axis_norms()
    vq_axis = mods ** (spec.q / 2.0)
    n = probe.n_per_axis
    quad = np.zeros((n,) * d)
    for j in range(d):
        sj = [1] * d
        sj[j] = n
        for k in range(d):
            sk = [1] * d
            sk[k] = n
            quad = quad + spec.correlation[j, k] * vq_axis.reshape(sj) * vq_axis.reshape(sk)
    vals = np.exp(-quad).astype(np.complex128)
    if spec.shift is not None:
        pN = p**N
        for j in range(d):
            gj = spec.shift[j]
            phases = np.array(
                [
                    cmath.exp(1j * _TWO_PI * float(frac_part_fraction(Fraction(i, pN) * gj, p)))
                    for i in range(n)
                ]
            )
            sj = [1] * d
            sj[j] = n
            vals = vals * phases.reshape(sj)
    return GridFunction(p, d, N, M, vals)


def density(spec: QGaussianSpec, allow_signed: bool = False) -> GridFunction:
    """Realized density (inverse Fourier of the characteristic functional).

    Requires positive definite correlation; a degenerate B has an atomic
    one-dimensional projection and no density.  The result is real within
    1e-10 and carries exactly unit grid mass.

    Positivity holds (within -1e-8) for diagonal correlation.  With
    off-diagonal entries the exact realization is measurably signed (dips of
    order 1e-3 relative, stable across levels): the cross-term
    characteristic functional is not positive definite on Q_p^d.  Such specs
    are rejected unless ``allow_signed`` is set, in which case the signed
    realization (still mass 1) is returned for quadrature use.
    """
    if np.linalg.eigvalsh(spec.correlation).min() <= 1e-14:
        raise DegenerateCorrelation(
            "correlation is degenerate: a projection of the measure is the "
            "atomic measure with one atom; no density exists"
        )
    dens = fourier(_char_functional_grid(spec), inverse=True)
    vals = np.asarray(dens.values)
    scale = float(np.max(np.abs(vals))) or 1.0
    if np.max(np.abs(vals.imag)) > 1e-10 * scale:
        raise DegenerateCorrelation("realized density has a non-real part; raise levels")
    if not allow_signed and np.min(vals.real) < -1e-8 * scale:
        raise DegenerateCorrelation(
            "realized density is signed (off-diagonal correlation); "
            "pass allow_signed=True for quadrature-only use"
        )
    return dens


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


@dataclass
class SampleBatch:
    """Exact draws from a grid-realized measure.

    Point i has coordinates ``idx[i, j] / p**M + extra[i, j] * p**N`` with
    ``extra`` a uniform integer in [0, p**R): R refinement digits below the
    resolution coset.  All coordinates are exact rationals with denominator
    p**M (the refinement term is p-adically below p**-N).
    """

    prime: int
    support_exp: int
    resolution_exp: int
    refine_digits: int
    idx: np.ndarray
    extra: np.ndarray

    def __post_init__(self):
        if self.resolution_exp < 0:
            raise ValueError("refined sampling requires resolution N >= 0")

    @property
    def count(self) -> int:
        return self.idx.shape[0]

    @property
    def dim(self) -> int:
        return self.idx.shape[1]

    def numerators(self) -> list:
        """Python-int numerators over the common denominator p**M."""
        p, M, N = self.prime, self.support_exp, self.resolution_exp
        pMN = p ** (M + N)
        out = []
        for i in range(self.count):
            out.append(
                tuple(
                    int(self.idx[i, j]) + int(self.extra[i, j]) * pMN
                    for j in range(self.dim)
                )
            )
        return out

    def fractions(self) -> list:
        den = self.prime**self.support_exp
        return [tuple(Fraction(nj, den) for nj in row) for row in self.numerators()]

    def norms(self) -> np.ndarray:
        """|x_j| per sample and coordinate (float array, exact powers of p)."""
        p, M = self.prime, self.support_exp
        out = np.zeros((self.count, self.dim))
        for i, row in enumerate(self.numerators()):
            for j, nj in enumerate(row):
                if nj == 0:
                    continue
                v = 0
                while nj % p == 0:
                    nj //= p
                    v += 1
                out[i, j] = float(p) ** (M - v)
        return out

    def empirical_char(self, z: tuple) -> complex:
        """Empirical characteristic functional at z (tuple of Fractions),
        computed from exact rational phases."""
        p = self.prime
        den_x = p**self.support_exp
        acc = 0.0 + 0.0j
        zf = [Fraction(zj) for zj in z]
        for row in self.numerators():
            r = sum(zj * Fraction(nj, den_x) for zj, nj in zip(zf, row))
            acc += cmath.exp(1j * _TWO_PI * float(frac_part_fraction(r, p)))
        return acc / self.count


def sample(
    spec: QGaussianSpec, count: int, rng: np.random.Generator, refine_digits: int = 0
) -> SampleBatch:
    """i.i.d. draws by inverse-CDF over the coset partition, refined by a
    uniform choice within the final coset.

    With B = 0 (pure shift) every sample lands in the finest coset of the
    shift; otherwise draws follow the realized density exactly at
    resolution N.
    """
    p, d = spec.prime, spec.dim
    M, N = spec.support_exp, spec.resolution_exp
    n = p ** (M + N)
    if np.allclose(spec.correlation, 0.0):
        shift = _as_fraction_shift(spec.shift, d)
        pM = p**M
        idx = np.zeros((count, d), dtype=np.int64)
        for j, g in enumerate(shift):
            t = g * pM
            if t.denominator != 1:
                raise ValueError("point-mass shift must sit on the grid")
            idx[:, j] = int(t) % n
    else:
        dens = density(spec)
        probs = np.asarray(dens.values).real.reshape(-1) * dens.coset_weight()
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        cdf = np.cumsum(probs)
        flat = np.searchsorted(cdf, rng.random(count), side="right")
        flat = np.minimum(flat, len(probs) - 1)
        idx = np.stack(np.unravel_index(flat, (n,) * d), axis=1).astype(np.int64)
    if refine_digits > 0:
        extra = rng.integers(0, p**refine_digits, size=(count, d), dtype=np.int64)
    else:
        extra = np.zeros((count, d), dtype=np.int64)
    return SampleBatch(p, M, N, refine_digits, idx, extra)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def moment_wick(B, indices) -> float:
    """Pair-partition moment: sum over pairings of products of B entries.

    Equals (n!)^-1 2^-n sum over all (2n)! slot permutations of
    B_{s1 s2} ... B_{s(2n-1) s(2n)} (each pairing carries multiplicity
    2^n n!, folded in).  Odd-length index tuples give 0.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    idx = list(indices)
    if len(idx) % 2 == 1:
        return 0.0
    if not idx:
        return 1.0
    j0 = idx[0]
    total = 0.0
    for m in range(1, len(idx)):
        total += B[j0, idx[m]] * moment_wick(B, idx[1:m] + idx[m + 1 :])
    return total


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    truncation_exp: int
    indices: tuple


def moment_numeric(
    spec: QGaussianSpec, indices, truncation_exp: int, dens: GridFunction | None = None
) -> MomentEstimate:
    """Truncated grid moment: integral over B(0, p**L)^d of
    prod |x_{j_i}|^(q/2) against the realized density.

    Requires zero shift.  The value depends on the truncation radius for
    moment orders >= q (heavy tails); the level is reported alongside.
    """
    if spec.shift is not None:
        raise ValueError("numeric moments are defined for zero shift")
    L = truncation_exp
    if L > spec.support_exp:
        raise ValueError("truncation exceeds the support level")
    if np.allclose(spec.correlation, 0.0):
        return MomentEstimate(0.0, L, tuple(indices))  # point mass at 0
    if dens is None:
        dens = density(spec, allow_signed=True)
    norms = dens.axis_norms()
    d, n = spec.dim, dens.n_per_axis
    mask = np.ones((n,) * d, dtype=bool)
    cutoff = float(spec.prime) ** L
    for ax in range(d):
        sh = [1] * d
        sh[ax] = n
        mask &= (norms <= cutoff).reshape(sh)
    weight = np.ones((n,) * d)
    for j in indices:
        sh = [1] * d
        sh[j] = n
        weight = weight * (norms ** (spec.q / 2.0)).reshape(sh)
    val = float(
        np.sum(np.asarray(dens.values).real[mask] * weight[mask]) * dens.coset_weight()
    )
    return MomentEstimate(val, L, tuple(indices))


def absolute_moment_numeric(
    spec: QGaussianSpec,
    s: float,
    truncation_exp: int,
    axis: int = 0,
    dens: GridFunction | None = None,
) -> MomentEstimate:
    """Truncated s-th absolute moment integral |x_axis|^s over B(0, p**L)^d.

    Converges as L grows exactly when s < q (tail exponent q+1)."""
    if dens is None:
        dens = density(spec, allow_signed=True)
    norms = dens.axis_norms()
    d, n = spec.dim, dens.n_per_axis
    cutoff = float(spec.prime) ** truncation_exp
    mask = np.ones((n,) * d, dtype=bool)
    for ax in range(d):
        sh = [1] * d
        sh[ax] = n
        mask &= (norms <= cutoff).reshape(sh)
    sh = [1] * d
    sh[axis] = n
    weight = np.broadcast_to((norms**s).reshape(sh), (n,) * d)
    val = float(
        np.sum(np.asarray(dens.values).real[mask] * weight[mask]) * dens.coset_weight()
    )
    return MomentEstimate(val, truncation_exp, (axis,))


# ---------------------------------------------------------------------------
# q-Wiener process with real time
# ---------------------------------------------------------------------------


@dataclass
class PathSample:
    """One realization of a process: real time grid, states in Q_p^d, and
    RNG-stream provenance.  States start at 0 and are exact rationals."""

    prime: int
    times: tuple
    states: list
    stream: str

    def __post_init__(self):
        if any(t2 <= t1 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("time grid must be strictly increasing")
        first = self.states[0]
        if any(x != 0 for x in first):
            raise ValueError("paths start at 0")

    @property
    def dim(self) -> int:
        return len(self.states[0])

    def state_norms(self) -> np.ndarray:
        out = np.zeros((len(self.times), self.dim))
        for i, st in enumerate(self.states):
            for j, x in enumerate(st):
                out[i, j] = _fraction_norm(x, self.prime)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t"] + [f"x{j}" for j in range(self.dim)])
        for t, st in zip(self.times, self.states):
            w.writerow(
                [repr(float(t))]
                + [PAdicNumber.from_fraction(x, self.prime).literal() for x in st]
            )
        return buf.getvalue()

    def manifest(self, spec: QGaussianSpec | None = None) -> dict:
        out = {"stream": self.stream, "prime": self.prime, "steps": len(self.times) - 1}
        if spec is not None:
            out["spec_hash"] = spec.spec_hash()
            out["levels"] = [spec.support_exp, spec.resolution_exp]
        return out


def _fraction_norm(x: Fraction, p: int) -> float:
    if x == 0:
        return 0.0
    num, den = x.numerator, x.denominator
    v = 0
    num = abs(num)
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return float(p) ** (-v)


class _IncrementSampler:
    """Caches per-step increment CDFs (one per distinct step length)."""

    def __init__(self, spec: QGaussianSpec):
        if spec.shift is not None:
            raise ValueError("the process version requires zero shift")
        self.spec = spec
        self._cache = {}

    def draw(self, dt: float, size, rng: np.random.Generator) -> np.ndarray:
        if np.allclose(self.spec.correlation, 0.0):
            return np.zeros(tuple(np.atleast_1d(size)) + (self.spec.dim,), dtype=np.int64)
        key = round(float(dt), 14)
        if key not in self._cache:
            dens = density(self.spec.with_correlation(self.spec.correlation * key))
            probs = np.asarray(dens.values).real.reshape(-1) * dens.coset_weight()
            probs = np.clip(probs, 0.0, None)
            self._cache[key] = (np.cumsum(probs / probs.sum()), dens.n_per_axis)
        cdf, n = self._cache[key]
        flat = np.searchsorted(cdf, rng.random(size), side="right")
        flat = np.minimum(flat, len(cdf) - 1)
        return np.stack(
            np.unravel_index(flat.reshape(-1), (n,) * self.spec.dim), axis=1
        ).reshape(tuple(np.atleast_1d(size)) + (self.spec.dim,))


def wiener_path(
    spec: QGaussianSpec, times, rng: np.random.Generator, stream: str = "wiener"
) -> PathSample:
    """Sample one q-Wiener path on a real time grid.

    Increments over [u, t] are independent with correlation (t - u) B,
    realized at the spec's levels; states are exact rationals accumulated
    from coset representatives.
    """
    times = tuple(float(t) for t in times)
    sampler = _IncrementSampler(spec)
    p, M = spec.prime, spec.support_exp
    pM = p**M
    d = spec.dim
    states = [tuple(Fraction(0) for _ in range(d))]
    for t1, t2 in zip(times, times[1:]):
        inc = sampler.draw(t2 - t1, 1, rng)[0]
        prev = states[-1]
        states.append(tuple(prev[j] + Fraction(int(inc[j]), pM) for j in range(d)))
    return PathSample(p, times, states, stream)


def wiener_increments(
    spec: QGaussianSpec, n_steps: int, dt: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized increment indices for ``count`` paths of ``n_steps`` equal
    steps; shape (count, n_steps, d)."""
    sampler = _IncrementSampler(spec)
    return sampler.draw(dt, (count, n_steps), rng)


# ---------------------------------------------------------------------------
# Ito-analog check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ItoPartitionRow:
    n_steps: int
    mean: float
    se_mean: float
    ratio: float
    se: float


@dataclass(frozen=True)
class ItoReport:
    """Monte Carlo report for the Ito-analog sum identity.

    ``rows[name]`` lists (n_steps, ratio, se) with
    ratio = MC[sum phi(t_j) |dxi_j|^q] / integral(phi); the truncation
    constant in the numerator depends only on the grid levels, so ratios of
    distinct integrands and of refinement stages are the stable observables.
    """

    rows: dict
    integrand_agreement: float
    refinement_stability: dict

    def max_refinement_drift(self) -> float:
        return max(self.refinement_stability.values())


def ito_check(
    integrands,
    spec: QGaussianSpec,
    interval,
    partition_counts,
    count: int,
    rng: np.random.Generator,
) -> ItoReport:
    """Estimate M[sum phi(t_j) |xi(t_{j+1}) - xi(t_j)|^q] across refining
    partitions and compare against integral(phi) dt.

    Requires d = 1 and scalar unit correlation (shape of the underlying
    identity); ``integrands`` maps names to callables on [a, b].  Partition
    counts must each divide the finest count: increments are drawn once at
    the finest level and aggregated (the grid-realized increment law is an
    exact convolution semigroup), so refinement drift is measured on coupled
    paths.
    """
    if spec.dim != 1:
        raise ValueError("the Ito-analog check is one-dimensional")
    if not np.allclose(spec.correlation, np.array([[1.0]])):
        raise ValueError("the Ito-analog check uses unit correlation")
    a, b = float(interval[0]), float(interval[1])
    p, M = spec.prime, spec.support_exp
    n_grid = p ** (M + spec.resolution_exp)
    val_table = _axis_valuation_table(p, n_grid)
    counts = sorted(int(c) for c in partition_counts)
    finest = counts[-1]
    if any(finest % c for c in counts):
        raise ValueError("each partition count must divide the finest one")
    fine_idx = wiener_increments(spec, finest, (b - a) / finest, count, rng)[..., 0]
    rows = {name: [] for name in integrands}
    for n_steps in counts:
        dt = (b - a) / n_steps
        t_left = a + dt * np.arange(n_steps)
        group = finest // n_steps
        inc_idx = fine_idx.reshape(count, n_steps, group).sum(axis=2) % n_grid
        v = val_table[inc_idx]
        mods = np.where(v >= 10**9, 0.0, float(p) ** (M - v.astype(float)))
        powq = mods**spec.q
        for name, phi in integrands.items():
            w = np.array([float(phi(t)) for t in t_left])
            sums = powq @ w
            mean = float(sums.mean())
            se = float(sums.std(ddof=1) / math.sqrt(count))
            tgrid = np.linspace(a, b, 4097)
            integral = float(np.trapezoid([phi(t) for t in tgrid], tgrid))
            if integral == 0.0:
                rows[name].append(ItoPartitionRow(n_steps, mean, se, math.nan, math.nan))
            else:
                rows[name].append(
                    ItoPartitionRow(n_steps, mean, se, mean / integral, se / abs(integral))
                )
    names = [n for n in integrands if not math.isnan(rows[n][-1].ratio)]
    finest = {name: rows[name][-1].ratio for name in names}
    agreement = 0.0
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            agreement = max(
                agreement,
                abs(finest[names[i]] - finest[names[j]]) / abs(finest[names[j]]),
            )
    stability = {}
    for name in names:
        drift = 0.0
        for r1, r2 in zip(rows[name], rows[name][1:]):
            drift = max(drift, abs(r2.ratio - r1.ratio) / abs(r1.ratio))
        stability[name] = drift
    return ItoReport(rows, agreement, stability)


def _axis_valuation_table(p: int, n: int) -> np.ndarray:
    from .grid import _axis_valuations

    return _axis_valuations(n, p)


# ---------------------------------------------------------------------------
# tail-bound check
# ---------------------------------------------------------------------------


def chebyshev_check(
    spec: QGaussianSpec, A, count: int, rng: np.random.Generator, sigmas: float = 5.0
) -> dict:
    """Empirical frequency of {A(v_q(x), v_q(x)) >= 1} against trace(A B).

    Returns the frequency, the bound, the MC standard error and the pass
    flag ``freq <= bound + sigmas * se``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    batch = sample(spec, count, rng)
    vq = batch.norms() ** (spec.q / 2.0)
    quad = np.einsum("ij,jk,ik->i", vq, A, vq)
    freq = float(np.mean(quad >= 1.0))
    se = math.sqrt(max(freq * (1 - freq), 1.0 / count) / count)
    bound = float(np.trace(A @ spec.correlation))
    return {
        "frequency": freq,
        "bound": bound,
        "se": se,
        "passed": freq <= bound + sigmas * se,
    }
