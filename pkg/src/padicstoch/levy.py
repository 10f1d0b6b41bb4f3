"""Poisson measures on configuration spaces over p-adic pavings and
compound-Poisson (Levy-type) processes with multiplicative-character
functionals.

A paving is a finite family of pairwise disjoint clopen balls with
nonnegative masses.  Configurations carry independent Poisson counts per
cell with points placed Haar-uniformly inside their cell.  Jump functionals
use the multiplicative characters pi_a; pavings for jump laws must avoid 0,
which makes |l| (hence pi_a with trivial unit character) exactly constant
per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import ConfigError
from .padic import Ball, PAdicNumber, UnitCharacter, mult_character


def _cell_value_fraction(ball: Ball) -> Fraction:
    c = ball.center
    if isinstance(c, tuple):
        raise ConfigError("Levy pavings are one-dimensional (cells in Q_p)")
    return c.to_fraction()


@dataclass(frozen=True)
class IntensitySpec:
    """Finite intensity measure on a disjoint paving of clopen balls."""

    cells: tuple
    masses: np.ndarray

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if masses.ndim != 1 or len(masses) != len(self.cells):
            raise ConfigError("one mass per cell required")
        if (masses < 0).any() or not np.isfinite(masses).all():
            raise ConfigError("cell masses must be finite and nonnegative")
        for i, a in enumerate(self.cells):
            for b in self.cells[i + 1 :]:
                if not a.is_disjoint_from(b):
                    raise ConfigError("paving cells must be pairwise disjoint")
        masses = masses.copy()
        masses.setflags(write=False)
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "masses", masses)

    @property
    def prime(self) -> int:
        return self.cells[0].prime

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def scaled(self, factor: float) -> "IntensitySpec":
        return IntensitySpec(self.cells, self.masses * float(factor))

    def require_avoids_zero(self) -> None:
        if not all(c.norm_constant() for c in self.cells):
            raise ConfigError(
                "jump paving must avoid 0 (each cell inside a norm sphere)"
            )


@dataclass(frozen=True)
class PointConfiguration:
    """Finite point multiset with per-cell provenance."""

    prime: int
    points: tuple  # Fractions
    cell_of: tuple  # index into the paving per point

    @property
    def total_count(self) -> int:
        return len(self.points)

    def counts(self, n_cells: int) -> np.ndarray:
        out = np.zeros(n_cells, dtype=np.int64)
        for c in self.cell_of:
            out[c] += 1
        return out


def _uniform_in_cell(ball: Ball, size: int, rng: np.random.Generator, depth: int = 12):
    """Haar-uniform points of the cell at `depth` base-p digits.

    The ball of radius p^k about c is c + p^-k Z_p; a uniform element of
    Z_p is drawn as an integer with `depth` base-p digits."""
    p = ball.prime
    c = _cell_value_fraction(ball)
    k = ball.radius_exponent
    scale = Fraction(1, p**k) if k >= 0 else Fraction(p ** (-k))
    zs = rng.integers(0, p**depth, size=size)
    return [c + Fraction(int(z)) * scale for z in zs]


def sample_poisson_config(
    spec: IntensitySpec, rng: np.random.Generator, depth: int = 12
) -> PointConfiguration:
    """One configuration: independent Poisson(m(cell)) counts per cell,
    points Haar-uniform within their cell."""
    points, cell_of = [], []
    for i, (ball, mass) in enumerate(zip(spec.cells, spec.masses)):
        n = int(rng.poisson(mass))
        if n:
            points.extend(_uniform_in_cell(ball, n, rng, depth))
            cell_of.extend([i] * n)
    return PointConfiguration(spec.prime, tuple(points), tuple(cell_of))


def sample_counts(
    spec: IntensitySpec, samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized per-cell counts for many independent configurations."""
    return rng.poisson(spec.masses, size=(samples, len(spec.cells)))


@dataclass(frozen=True)
class CountLawReport:
    empirical: float
    exact: float
    se: float
    sigmas: float
    passed: bool


def count_law_check(
    spec: IntensitySpec,
    regions,
    targets,
    samples: int,
    rng: np.random.Generator,
    sigmas: float = 4.0,
) -> CountLawReport:
    """Empirical frequency of {card(config in region_i) = n_i for all i}
    against prod m(R_i)^(n_i) e^(-m(R_i)) / n_i!.

    ``regions`` is a list of cell-index tuples (unions of paving cells are
    allowed; they must be disjoint, which holds automatically for distinct
    indices)."""
    used = [i for reg in regions for i in reg]
    if len(set(used)) != len(used):
        raise ConfigError("regions must use disjoint cells")
    counts = sample_counts(spec, samples, rng)
    exact = 1.0
    hits = np.ones(samples, dtype=bool)
    for reg, n_i in zip(regions, targets):
        mass = float(spec.masses[list(reg)].sum())
        exact *= mass**n_i * math.exp(-mass) / math.factorial(n_i)
        hits &= counts[:, list(reg)].sum(axis=1) == n_i
    emp = float(hits.mean())
    se = math.sqrt(max(exact * (1 - exact), 1.0 / samples) / samples)
    dev = abs(emp - exact) / se
    return CountLawReport(emp, exact, se, dev, dev <= sigmas)


def counting_law_chi_square(
    spec: IntensitySpec, samples: int, rng: np.random.Generator, max_count: int = 6
):
    """Joint chi-square of the per-cell counting law on the paving.

    Bins are the product of {0..max_count-1, overflow} per cell, pooled so
    every expected bin count is at least 5; returns (statistic, dof, p)."""
    counts = np.minimum(sample_counts(spec, samples, rng), max_count)
    n_cells = len(spec.cells)
    shape = (max_count + 1,) * n_cells
    observed = np.zeros(shape)
    for row in counts:
        observed[tuple(row)] += 1
    pmf = []
    for mass in spec.masses:
        probs = [
            mass**k * math.exp(-mass) / math.factorial(k) for k in range(max_count)
        ]
        probs.append(1.0 - sum(probs))
        pmf.append(np.array(probs))
    expected = np.ones(shape)
    for ax, probs in enumerate(pmf):
        sh = [1] * n_cells
        sh[ax] = max_count + 1
        expected = expected * probs.reshape(sh)
    expected = expected * samples
    obs_flat, exp_flat = observed.reshape(-1), expected.reshape(-1)
    order = np.argsort(exp_flat)[::-1]
    obs_pool, exp_pool = [], []
    acc_o = acc_e = 0.0
    for i in order:
        acc_o += obs_flat[i]
        acc_e += exp_flat[i]
        if acc_e >= 5.0:
            obs_pool.append(acc_o)
            exp_pool.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        obs_pool[-1] += acc_o
        exp_pool[-1] += acc_e
    obs_pool, exp_pool = np.array(obs_pool), np.array(exp_pool)
    exp_pool *= obs_pool.sum() / exp_pool.sum()
    stat = float(((obs_pool - exp_pool) ** 2 / exp_pool).sum())
    dof = len(obs_pool) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# compound Poisson / Levy machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpFunctionalSpec:
    """Drift constant, jump intensity on a zero-avoiding paving, and the
    multiplicative character pi_a applied to jumps.

    With the trivial unit character and real ``a`` the functional is real
    and exactly constant per cell, so cell values are evaluated once at the
    cell centers."""

    drift: float
    intensity: IntensitySpec
    a: float = 2.0
    pi0: UnitCharacter | None = None

    def __post_init__(self):
        self.intensity.require_avoids_zero()

    def cell_values(self) -> np.ndarray:
        vals = []
        for ball in self.intensity.cells:
            v = mult_character(self.a, ball.center, self.pi0)
            if abs(v.imag) > 1e-14:
                raise ConfigError(
                    "Laplace functionals require a real character (trivial pi0, real a)"
                )
            vals.append(v.real)
        return np.array(vals)


def levy_exponent(spec: JumpFunctionalSpec):
    """psi(rho) = rho m0 + sum_cells (1 - exp(-rho pi(l_cell))) n(cell);
    psi(0) = 0 exactly."""
    pis = spec.cell_values()
    masses = spec.intensity.masses

    def psi(rho: float) -> float:
        if rho == 0.0:
            return 0.0
        return float(rho * spec.drift + ((1.0 - np.exp(-rho * pis)) * masses).sum())

    return psi


@dataclass
class LevyPath:
    """Piecewise-constant functional trace t*m0 + sum_{jumps<=t} pi(l) plus
    the K-valued jump sum, reported on a real time grid."""

    prime: int
    times: tuple
    trace: np.ndarray
    jump_times: np.ndarray
    jump_cells: np.ndarray
    states: list  # Fractions: cumulative jump sums at grid times
    stream: str

    def to_csv(self) -> str:
        import csv as _csv
        import io as _io

        buf = _io.StringIO()
        w = _csv.writer(buf)
        w.writerow(["t", "jump_count", "functional", "state"])
        for i, t in enumerate(self.times):
            k = int(np.searchsorted(self.jump_times, t, side="right"))
            w.writerow(
                [
                    repr(float(t)),
                    k,
                    repr(float(self.trace[i])),
                    PAdicNumber.from_fraction(self.states[i], self.prime).literal(),
                ]
            )
        return buf.getvalue()


def compound_poisson_path(
    rate: float,
    spec: JumpFunctionalSpec,
    times,
    rng: np.random.Generator,
    depth: int = 12,
    stream: str = "levy",
) -> LevyPath:
    """One compound-Poisson path: jump times Poisson(rate) on [t0, t_end],
    jump cells drawn from the normalized intensity, magnitudes
    Haar-uniform within their cell."""
    times = tuple(float(t) for t in times)
    t0, t1 = times[0], times[-1]
    weights = spec.intensity.masses / spec.intensity.total_mass
    n_jumps = int(rng.poisson(rate * (t1 - t0)))
    jt = np.sort(rng.uniform(t0, t1, size=n_jumps))
    cells = rng.choice(len(weights), size=n_jumps, p=weights)
    pis = spec.cell_values()
    values = []
    for c in cells:
        values.append(_uniform_in_cell(spec.intensity.cells[int(c)], 1, rng, depth)[0])
    trace = np.empty(len(times))
    states = []
    for i, t in enumerate(times):
        k = int(np.searchsorted(jt, t, side="right"))
        trace[i] = (t - t0) * spec.drift + pis[cells[:k]].sum()
        states.append(sum(values[:k], Fraction(0)))
    return LevyPath(spec.intensity.prime, times, trace, jt, cells, states, stream)


@dataclass(frozen=True)
class LaplaceRow:
    rho: float
    empirical: float
    exact: float
    se: float
    sigmas: float
    passed: bool


def levy_laplace_check(
    spec: JumpFunctionalSpec,
    t: float,
    rho_grid,
    samples: int,
    rng: np.random.Generator,
    sigmas: float = 4.0,
) -> list:
    """Monte Carlo check of M exp(-rho * trace(t)) = exp(-t psi(rho)).

    Paths carry jump intensity t * n (cell counts Poisson(t n(cell))); the
    trace is t m0 + sum pi(l_j).  Vectorized over paths."""
    psi = levy_exponent(spec)
    pis = spec.cell_values()
    counts = rng.poisson(spec.intensity.masses * t, size=(samples, len(pis)))
    jump_sum = counts @ pis
    trace = t * spec.drift + jump_sum
    out = []
    for rho in rho_grid:
        vals = np.exp(-float(rho) * trace)
        emp = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(samples)) or 1.0 / samples
        exact = math.exp(-t * psi(float(rho)))
        dev = abs(emp - exact) / se
        out.append(LaplaceRow(float(rho), emp, exact, se, dev, dev <= sigmas))
    return out


# ---------------------------------------------------------------------------
# inhomogeneous variant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeBlock:
    t_start: float
    t_end: float
    masses: np.ndarray

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ConfigError("empty time block")
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))


@dataclass(frozen=True)
class InhomogeneousSpec:
    """Drift sample path c(t) (piecewise linear through knots) and a
    time-block x cell jump intensity; block masses spread uniformly in time
    within their block."""

    drift_knots: tuple  # (t, c(t)) pairs, strictly increasing in t
    blocks: tuple
    paving: IntensitySpec
    a: float = 2.0
    pi0: UnitCharacter | None = None

    def __post_init__(self):
        self.paving.require_avoids_zero()
        ts = [k[0] for k in self.drift_knots]
        if len(ts) < 2 or any(b >= c for b, c in zip(ts, ts[1:])):
            raise ConfigError("drift knots must be strictly increasing (>= 2 points)")
        for blk in self.blocks:
            if len(blk.masses) != len(self.paving.cells):
                raise ConfigError("block masses must match the paving")

    def drift(self, t: float) -> float:
        ts = np.array([k[0] for k in self.drift_knots])
        cs = np.array([k[1] for k in self.drift_knots])
        return float(np.interp(t, ts, cs))

    def window_masses(self, t1: float, t2: float) -> np.ndarray:
        """n((t1, t2] x cell): uniform-in-time block masses restricted."""
        out = np.zeros(len(self.paving.cells))
        for blk in self.blocks:
            span = blk.t_end - blk.t_start
            overlap = max(0.0, min(t2, blk.t_end) - max(t1, blk.t_start))
            out += blk.masses * (overlap / span)
        return out

    def cell_values(self) -> np.ndarray:
        return JumpFunctionalSpec(0.0, self.paving, self.a, self.pi0).cell_values()


def inhomogeneous_levy_path(
    spec: InhomogeneousSpec, times, rng: np.random.Generator, stream: str = "levy-inh"
) -> LevyPath:
    """Path with trace c(t) + sum_{jumps<=t} pi(l); per (block, cell) the
    jump count is Poisson(block mass) with times uniform in the block."""
    times = tuple(float(t) for t in times)
    jt, cells = [], []
    for blk in spec.blocks:
        for ci, mass in enumerate(blk.masses):
            n = int(rng.poisson(mass))
            if n:
                jt.extend(rng.uniform(blk.t_start, blk.t_end, size=n))
                cells.extend([ci] * n)
    jt = np.array(jt)
    cells = np.array(cells, dtype=np.int64)
    order = np.argsort(jt)
    jt, cells = jt[order], cells[order]
    pis = spec.cell_values()
    trace = np.empty(len(times))
    states = []
    depth = 12
    values = [
        _uniform_in_cell(spec.paving.cells[int(c)], 1, rng, depth)[0] for c in cells
    ]
    for i, t in enumerate(times):
        k = int(np.searchsorted(jt, t, side="right"))
        trace[i] = spec.drift(t) + (pis[cells[:k]].sum() if k else 0.0)
        states.append(sum(values[:k], Fraction(0)))
    return LevyPath(spec.paving.prime, times, trace, jt, cells, states, stream)


def inhomogeneous_laplace_check(
    spec: InhomogeneousSpec,
    t1: float,
    t2: float,
    rho_grid,
    samples: int,
    rng: np.random.Generator,
    sigmas: float = 4.0,
) -> list:
    """Two-time identity: M exp(-rho (trace(t2) - trace(t1))) equals
    exp(-rho (c(t2) - c(t1)) - sum (1 - e^(-rho pi)) n((t1,t2] x cell))."""
    pis = spec.cell_values()
    w_masses = spec.window_masses(t1, t2)
    counts = rng.poisson(w_masses, size=(samples, len(pis)))
    delta = counts @ pis + (spec.drift(t2) - spec.drift(t1))
    out = []
    for rho in rho_grid:
        vals = np.exp(-float(rho) * delta)
        emp = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(samples)) or 1.0 / samples
        exact = math.exp(
            -float(rho) * (spec.drift(t2) - spec.drift(t1))
            - float(((1.0 - np.exp(-float(rho) * pis)) * w_masses).sum())
        )
        dev = abs(emp - exact) / se
        out.append(LaplaceRow(float(rho), emp, exact, se, dev, dev <= sigmas))
    return out
