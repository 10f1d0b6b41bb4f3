"""Stochastic antiderivational equations: chain partition sums, the Picard
solver, the derivative transform and its cocycle law, evolution families on
toy chart manifolds, and the moment bound."""

from fractions import Fraction

import numpy as np
import pytest

from padicstoch.errors import ChartEscape, ConfigError, NoContraction, UnsampledDriver
from padicstoch.geodesic import ChristoffelField, PolyScalar
from padicstoch.padic import PAdicNumber
from padicstoch.qgaussian import QGaussianSpec
from padicstoch.sde import (
    CoeffField,
    DriverPaths,
    EvolutionFamily,
    HigherTerm,
    ManifoldSpec,
    PartitionScheme,
    PolyFunction,
    SdeSpec,
    fraction_norm,
    ito_transform_J,
    moment_bound_check,
    phat_integral,
    solve_sde,
    transformed_equation_residual,
    wiener_driver,
    zero_driver,
)

P3 = 3
SCHEME = PartitionScheme(P3, 0, 3)


def qwiener(p=P3, M=1, N=2):
    return QGaussianSpec(2.0, [[1.0]], p, M, N)


def linear_drift_field(lam=3):
    one = PAdicNumber.one(P3)
    return CoeffField(
        P3,
        1,
        (PolyScalar(P3, 2, {(0, 1): PAdicNumber.from_int(lam, P3), (0, 0): one}),),
        ((PolyScalar(P3, 2, {}),),),
    )


class TestPartitionScheme:
    def test_chain_consistency(self):
        # sigma_n o sigma_m = sigma_min, with sigma_0 = t0 = 0
        for j in (0, 5, 14, 26):
            for m in range(4):
                for n in range(4):
                    lhs = SCHEME.sigma_index(SCHEME.sigma_index(j, m), n)
                    assert lhs == SCHEME.sigma_index(j, min(m, n))
        assert SCHEME.sigma_index(17, 0) == 0

    def test_chain_telescopes(self):
        for j in range(SCHEME.size):
            total = sum((dt for _, dt in SCHEME.chain_links(j)), Fraction(0))
            assert total == SCHEME.rep_value(j)

    def test_nested_refinement(self):
        fine = PartitionScheme(P3, 0, 4)
        for j in range(27):
            assert fine.sigma_index(j, 3) == SCHEME.sigma_index(j, 3)


class TestPhatIntegral:
    def test_constant_integrand_telescopes(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [4], [[0]]))
        for j in (1, 8, 22):
            val = phat_integral(spec, SCHEME, j, lambda idx: (Fraction(0),))
            assert val[0] == 4 * SCHEME.rep_value(j)

    def test_noise_term_vanishes_for_constant_driver(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[7]]))
        drv = zero_driver(SCHEME, 1)
        val = phat_integral(spec, SCHEME, 20, lambda idx: (Fraction(0),), drv)
        assert val[0] == 0

    def test_refinement_delta_below_modulus(self):
        # polynomial integrand: one-level-coarser sums differ by at most
        # sup|a| * p^(radius - level)
        one = PAdicNumber.one(P3)
        fld = CoeffField(
            P3,
            1,
            (PolyScalar(P3, 2, {(2, 0): one, (0, 0): PAdicNumber.from_int(2, P3)}),),
            ((PolyScalar(P3, 2, {}),),),
        )
        spec = SdeSpec(fld)
        state = lambda idx: (Fraction(0),)
        for j in (13, 26):
            full = phat_integral(spec, SCHEME, j, state)
            coarse = phat_integral(spec, SCHEME, j, state, level=2)
            delta = fraction_norm(full[0] - coarse[0], P3)
            assert delta <= 1.0 * float(P3) ** (0 - 2)

    def test_unsampled_driver_raises(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[1]]))
        bad = DriverPaths(P3, SCHEME, [[(Fraction(0),)] * 5])  # too short
        with pytest.raises(UnsampledDriver):
            phat_integral(spec, SCHEME, 20, lambda idx: (Fraction(0),), bad)


class TestSolveSde:
    def test_pure_drift_linear(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[0]]))
        sol = solve_sde(spec, (Fraction(2),), SCHEME)
        for j in range(SCHEME.size):
            assert sol.state(j)[0] == 2 + SCHEME.rep_value(j)
        assert sol.residual == 0.0

    def test_pure_noise_pathwise(self):
        drv = wiener_driver(qwiener(), SCHEME, 2, np.random.default_rng(0))
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[9]]))
        sol = solve_sde(spec, (Fraction(1),), SCHEME, drv, path=1)
        for j in range(SCHEME.size):
            assert sol.state(j)[0] == 1 + 9 * drv.at(1, j)[0]

    def test_linear_drift_product_oracle(self):
        lam = Fraction(3)
        spec = SdeSpec(linear_drift_field(3))
        # subtract the constant part: use pure lambda*xi field
        one = PAdicNumber.one(P3)
        fld = CoeffField(
            P3, 1, (PolyScalar(P3, 2, {(0, 1): PAdicNumber.from_int(3, P3)}),),
            ((PolyScalar(P3, 2, {}),),),
        )
        sol = solve_sde(SdeSpec(fld), (Fraction(1),), SCHEME)
        for j in range(SCHEME.size):
            acc = Fraction(1)
            for _, dt in SCHEME.chain_links(j):
                acc *= 1 + lam * dt
            assert sol.state(j)[0] == acc

    def test_contraction_certificate_enforced(self):
        one = PAdicNumber.one(P3)
        fld = CoeffField(
            P3, 1, (PolyScalar(P3, 2, {(0, 1): one}),), ((PolyScalar(P3, 2, {}),),)
        )  # Lipschitz 1 at radius 1: kappa = 1
        with pytest.raises(NoContraction):
            solve_sde(SdeSpec(fld), (Fraction(0),), SCHEME)

    def test_picard_ratio_below_certificate(self):
        spec = SdeSpec(linear_drift_field(3))
        sol = solve_sde(spec, (Fraction(1),), SCHEME)
        assert sol.contraction == pytest.approx(1 / 3)
        nonzero = [d for d in sol.deltas if d > 0]
        ratios = [b / a for a, b in zip(nonzero, nonzero[1:])]
        assert all(r <= sol.contraction + 1e-12 for r in ratios)

    def test_direct_sweep_matches_picard(self):
        from padicstoch.sde import solve_chain_direct

        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(21))
        spec = SdeSpec(linear_drift_field(3))
        picard = solve_sde(spec, (Fraction(1),), SCHEME, drv)
        direct = solve_chain_direct(spec, (Fraction(1),), SCHEME, drv)
        assert picard.values == direct

    def test_determinism(self):
        drv1 = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(42))
        drv2 = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(42))
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        s1 = solve_sde(spec, (Fraction(0),), SCHEME, drv1)
        s2 = solve_sde(spec, (Fraction(0),), SCHEME, drv2)
        assert s1.values == s2.values
        assert s1.to_csv() == s2.to_csv()

    def test_solution_stability_under_refinement(self):
        # levels L and L+1 agree on the coarse grid within the modulus bound
        fine = PartitionScheme(P3, 0, 4)
        spec = SdeSpec(linear_drift_field(3))
        sol_fine = solve_sde(spec, (Fraction(1),), fine)
        sol_coarse = solve_sde(spec, (Fraction(1),), SCHEME)
        for j in range(SCHEME.size):
            d = fraction_norm(sol_fine.state(j)[0] - sol_coarse.state(j)[0], P3)
            assert d <= float(P3) ** (-3)

    def test_higher_term_contribution(self):
        # one extra (b=2, l=0, m=0) term with constant form adds
        # sum dt^2 along the chain
        form = PolyScalar.constant(PAdicNumber.from_int(1, P3), 2)
        spec = SdeSpec(
            CoeffField.constants(P3, 1, [0], [[0]]),
            higher=(HigherTerm(2, 0, 0, form),),
        )
        sol = solve_sde(spec, (Fraction(0),), SCHEME)
        for j in (4, 13):
            expect = sum(dt * dt for _, dt in SCHEME.chain_links(j))
            assert sol.state(j)[0] == expect


class TestItoTransform:
    def _phi(self):
        one = PAdicNumber.one(P3)
        return PolyFunction(
            (PolyScalar(P3, 1, {(2,): one, (1,): PAdicNumber.from_int(3, P3)}),)
        )

    def test_identity_transform(self):
        ident = PolyFunction((PolyScalar(P3, 1, {(1,): PAdicNumber.one(P3)}),))
        assert ito_transform_J(ident, (Fraction(7),))[0][0] == 1

    def test_affine_transform_constant(self):
        one = PAdicNumber.one(P3)
        aff = PolyFunction(
            (PolyScalar(P3, 1, {(1,): PAdicNumber.from_int(5, P3), (0,): one}),)
        )
        for x in (Fraction(0), Fraction(4), Fraction(1, 3)):
            assert ito_transform_J(aff, (x,))[0][0] == 5

    def test_cocycle_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            c1, c2, c3, c4 = (int(v) for v in rng.integers(-9, 9, size=4))
            phi = PolyFunction(
                (
                    PolyScalar(
                        P3,
                        1,
                        {
                            (2,): PAdicNumber.from_int(c1, P3) if c1 else PAdicNumber.one(P3),
                            (1,): PAdicNumber.from_int(c2 or 1, P3),
                        },
                    ),
                )
            )
            psi = PolyFunction(
                (
                    PolyScalar(
                        P3,
                        1,
                        {
                            (2,): PAdicNumber.from_int(c3 or 2, P3),
                            (0,): PAdicNumber.from_int(c4 or 1, P3),
                        },
                    ),
                )
            )
            comp = phi.compose(psi)
            x = (Fraction(int(rng.integers(-20, 20))),)
            lhs = ito_transform_J(comp, x)[0][0]
            rhs = ito_transform_J(phi, psi.eval(x))[0][0] * ito_transform_J(psi, x)[0][0]
            # coefficients are representatives mod p^W: compare p-adically
            assert fraction_norm(lhs - rhs, P3) <= float(P3) ** (-20)

    def test_associativity_of_transform_composition(self):
        one = PAdicNumber.one(P3)
        mk = lambda c2, c1: PolyFunction(
            (PolyScalar(P3, 1, {(2,): PAdicNumber.from_int(c2, P3), (1,): PAdicNumber.from_int(c1, P3)}),)
        )
        phi, psi, chi = mk(1, 3), mk(2, 1), mk(1, 2)
        x = (Fraction(5),)
        j_chi = ito_transform_J(chi, x)[0][0]
        j_psi = ito_transform_J(psi, chi.eval(x))[0][0]
        j_phi = ito_transform_J(phi, psi.eval(chi.eval(x)))[0][0]
        assert (j_phi * j_psi) * j_chi == j_phi * (j_psi * j_chi)
        comp_all = phi.compose(psi).compose(chi)
        lhs = ito_transform_J(comp_all, x)[0][0]
        assert fraction_norm(lhs - j_phi * j_psi * j_chi, P3) <= float(P3) ** (-20)

    def test_transformed_equation_residual_within_taylor_bound(self):
        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(3))
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        sol = solve_sde(spec, (Fraction(0),), SCHEME, drv)
        rep = transformed_equation_residual(self._phi(), spec, sol, drv)
        assert rep.passed

    def test_affine_transform_residual_zero(self):
        # phi affine: the transformed chain equation is exact (no remainder)
        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(4))
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        sol = solve_sde(spec, (Fraction(0),), SCHEME, drv)
        one = PAdicNumber.one(P3)
        aff = PolyFunction(
            (PolyScalar(P3, 1, {(1,): PAdicNumber.from_int(5, P3), (0,): one}),)
        )
        rep = transformed_equation_residual(aff, spec, sol, drv)
        assert rep.max_residual == 0.0


def toy_manifold(spec, two_charts=False):
    flat = ChristoffelField.zero("U", P3, 1)
    charts = {"U": ((Fraction(0),), 3)}
    fields = {"U": flat}
    transitions = {}
    if two_charts:
        charts["V"] = ((Fraction(0),), 3)
        fields["V"] = ChristoffelField.zero("V", P3, 1)
        one = PAdicNumber.one(P3)
        shift = PolyFunction(
            (PolyScalar(P3, 1, {(1,): one, (0,): PAdicNumber.from_int(3, P3)}),)
        )
        unshift = PolyFunction(
            (PolyScalar(P3, 1, {(1,): one, (0,): PAdicNumber.from_int(-3, P3)}),)
        )
        transitions = {("U", "V"): shift, ("V", "U"): unshift}
    return ManifoldSpec(charts, fields, transitions, spec)


class TestEvolutionFamily:
    def test_identity_when_coefficients_vanish(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[0]]))
        man = toy_manifold(spec)
        drv = zero_driver(SCHEME, 1)
        ev = EvolutionFamily(man, SCHEME, drv)
        for j in (3, 9, 26):
            out = ev.apply((Fraction(5),), j, 0)
            assert not out.escaped and out.end_state[0] == 5

    def test_single_chart_flat_reduces_to_sde_flow(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(5))
        man = toy_manifold(spec)
        ev = EvolutionFamily(man, SCHEME, drv)
        sol = solve_sde(spec, (Fraction(1),), SCHEME, drv)
        for j in (5, 14, 26):
            assert ev.apply((Fraction(1),), j, 0).end_state[0] == sol.state(j)[0]

    def test_evolution_property_exact(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(6))
        ev = EvolutionFamily(toy_manifold(spec), SCHEME, drv)
        x0 = (Fraction(2),)
        for j in (8, 17, 26):
            for k in (1, 2):
                s = SCHEME.sigma_index(j, k)
                direct = ev.apply(x0, j, 0)
                mid = ev.apply(x0, s, 0)
                comp = ev.apply(mid.end_state, j, s)
                assert comp.end_state == direct.end_state

    def test_two_chart_glueing_agrees_with_single_chart(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[9]]))
        drv = wiener_driver(qwiener(), SCHEME, 1, np.random.default_rng(8))
        single = EvolutionFamily(toy_manifold(spec), SCHEME, drv)
        double = EvolutionFamily(toy_manifold(spec, two_charts=True), SCHEME, drv)
        x0 = (Fraction(4),)
        for j in (7, 26):
            a = single.apply(x0, j, 0)
            b = double.apply(x0, j, 0)
            # chart V coordinates differ by the affine shift; map back
            val = b.end_state[0] - 3 if b.chart == "V" else b.end_state[0]
            assert val == a.end_state[0]

    def test_chart_escape_flagged(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [Fraction(1, 3)], [[0]]))
        charts = {"U": ((Fraction(0),), 0)}  # unit ball only
        man = ManifoldSpec(charts, {"U": ChristoffelField.zero("U", P3, 1)}, {}, spec)
        drv = zero_driver(SCHEME, 1)
        ev = EvolutionFamily(man, SCHEME, drv)
        out = ev.apply((Fraction(0),), 1, 0)  # drift 1/3 * dt=1 has norm 3
        assert out.escaped

    def test_source_off_chain_rejected(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[0]]))
        ev = EvolutionFamily(toy_manifold(spec), SCHEME, zero_driver(SCHEME, 1))
        with pytest.raises(ConfigError):
            ev.apply((Fraction(0),), 4, 2)  # 2 not on chain(4) = [0, 1, 4]


class TestMomentBound:
    def test_zero_coefficients_exact(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [0], [[0]]))
        out = moment_bound_check(
            spec, SCHEME, (Fraction(2),), 1, 0.0, 0.0, 10,
            lambda count: zero_driver(SCHEME, 1, count),
        )
        assert out["passed"]
        assert all(q == 1.0 for _, q, _, _ in out["rows"])  # |2|_3 = 1

    def test_drift_only_telescoping(self):
        spec = SdeSpec(CoeffField.constants(P3, 1, [1], [[0]]))
        out = moment_bound_check(
            spec, SCHEME, (Fraction(0),), 1, 1.0, 0.0, 10,
            lambda count: zero_driver(SCHEME, 1, count),
        )
        assert out["passed"]

    def test_full_spec_monte_carlo(self):
        one = PAdicNumber.one(P3)
        fld = CoeffField(
            P3,
            1,
            (PolyScalar(P3, 2, {(0, 1): PAdicNumber.from_int(3, P3), (0, 0): one}),),
            ((PolyScalar(P3, 2, {(0, 0): PAdicNumber.from_int(9, P3)}),),),
        )
        counter = [0]

        def factory(count):
            counter[0] += 1
            return wiener_driver(
                qwiener(), SCHEME, count, np.random.default_rng(100 + counter[0])
            )

        out = moment_bound_check(
            SdeSpec(fld), SCHEME, (Fraction(1),), 1, 1.0, 1.0, 300, factory
        )
        assert out["passed"]
