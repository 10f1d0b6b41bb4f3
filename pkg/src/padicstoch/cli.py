"""Batch command-line driver: experiment configs in, deterministic CSV
verification tables out.

Every run writes ``<out>/<command>.csv`` (plus any artifact files) and a
manifest ``<out>/<command>_manifest.json`` capturing the fully resolved
config, package version and output digests.  Reruns with the same seed are
bit-identical; a wall-clock stamp is added only on request (--stamp), so it
never breaks determinism checks.

Config files are flat INI: a [global] section (p, precision, level_m,
level_n, seed, samples, workers, out) plus one section per subcommand;
command-line flags override config values.

Exit codes: 0 ok; 2 config violations; 3 numerical-certificate failures
(including acceptance criteria that do not pass); 1 internal errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, acceptance
from . import geodesic as geo
from . import grid as gr
from . import levy as lv
from . import pseudodiff as pdiff
from . import qgaussian as qg
from . import sde
from .errors import CertificateError, ConfigError
from .padic import PAdicNumber, set_default_precision
from .parallel import run_chunked

GLOBAL_DEFAULTS = {
    "p": 2,
    "precision": 32,
    "level_m": 4,
    "level_n": 3,
    "seed": 7,
    "samples": 20000,
    "workers": 1,
    "out": "out",
}


def _load_config(path, section):
    merged = {}
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file {path!r} not found")
        for sec in ("global", section):
            if parser.has_section(sec):
                merged.update(dict(parser.items(sec)))
    return merged


def _resolve(args, extra_defaults=None):
    """defaults < config file < explicit flags."""
    params = dict(GLOBAL_DEFAULTS)
    if extra_defaults:
        params.update(extra_defaults)
    params.update(_load_config(args.config, args.command))
    for key in list(params):
        flag = getattr(args, key, None)
        if flag is not None:
            params[key] = flag
    for key in ("p", "precision", "level_m", "level_n", "seed", "samples", "workers"):
        params[key] = int(params[key])
    if params["p"] < 2 or params["precision"] < 4 or params["samples"] < 1:
        raise ConfigError("p >= 2, precision >= 4 and samples >= 1 required")
    return params


class RunWriter:
    def __init__(self, params, command, stamp=False):
        self.dir = Path(params["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.params = params
        self.stamp = stamp
        self.outputs = {}

    def write_text(self, name: str, text: str) -> None:
        path = self.dir / name
        path.write_text(text)
        self.outputs[name] = hashlib.sha256(text.encode()).hexdigest()

    def write_rows(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        for row in rows:
            w.writerow(row)
        self.write_text(name, buf.getvalue())

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "version": __version__,
            # `out` is the artifact location, not experiment config; keeping
            # it out of the manifest preserves byte-identity across target
            # directories
            "params": {
                k: str(v) for k, v in sorted(self.params.items()) if k != "out"
            },
            "outputs": self.outputs,
        }
        if self.stamp:
            manifest["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        self.write_text(
            f"{self.command}_manifest.json", json.dumps(manifest, indent=2, sort_keys=True)
        )


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real!r}{'+' if x.imag >= 0 else ''}{x.imag!r}j"
    return repr(float(x))


# -- handlers ----------------------------------------------------------------


def cmd_gamma(args):
    params = _resolve(args, {"u": "2.0"})
    w = RunWriter(params, "gamma", args.stamp)
    rows = []
    for tok in str(params["u"]).split(","):
        u = complex(tok)
        closed = gr.gamma_k(params["p"], u)
        oracle = gr.gamma_k_by_shells(params["p"], u, k_min=-220, k_max=4)
        rows.append(
            [tok, _fmt(closed.real), _fmt(closed.imag), _fmt(abs(closed - oracle))]
        )
    w.write_rows("gamma.csv", ["u", "value_re", "value_im", "oracle_delta"], rows)
    w.finish()
    return 0


def cmd_fourier_check(args):
    params = _resolve(args)
    w = RunWriter(params, "fourier-check", args.stamp)
    rng = np.random.default_rng(params["seed"])
    p, M, N = params["p"], params["level_m"], params["level_n"]
    rows = []
    for i in range(20):
        n = p ** (M + N)
        f = gr.GridFunction(p, 1, M, N, rng.normal(size=n) + 1j * rng.normal(size=n))
        inv = gr.fourier(gr.fourier(f), inverse=True).sup_diff(f)
        par = abs(f.l2_norm() - gr.fourier(f).l2_norm())
        rows.append([i, _fmt(inv), _fmt(par)])
    w.write_rows("fourier-check.csv", ["grid", "inversion_err", "parseval_err"], rows)
    w.finish()
    return 0


def cmd_vladimirov(args):
    params = _resolve(args, {"n": "2.0", "u": "1.0"})
    w = RunWriter(params, "vladimirov", args.stamp)
    p, M, N = params["p"], params["level_m"], params["level_n"]
    n_pow, u = float(params["n"]), float(params["u"])
    g = pdiff.vladimirov_apply(gr.windowed_power(p, M, N, n_pow), u)
    norms = g.axis_norms()
    const = gr.gamma_k(p, n_pow + 1) / gr.gamma_k(p, n_pow + 1 - u)
    K = pdiff.power_eigen_truncation_constant(p, n_pow, u, M)
    rows = []
    vals = np.asarray(g.values)
    for shell in sorted(set(norms[norms > 0])):
        mask = norms == shell
        expect = const * shell ** (n_pow - u) + K
        rel = float(np.abs(vals[mask] - expect).max() / abs(const * shell ** (n_pow - u)))
        rows.append([_fmt(shell), _fmt(expect.real), _fmt(rel)])
    w.write_rows("vladimirov.csv", ["shell", "expected_re", "max_rel_err"], rows)
    w.finish()
    return 0


def cmd_heat(args):
    params = _resolve(args, {"t": "0.5", "b": "1.0", "h": "1e-3"})
    w = RunWriter(params, "heat", args.stamp)
    p, M, N = params["p"], params["level_m"], params["level_n"]
    sym = pdiff.SymbolSpec(1, {(0, 0): float(params["b"])})
    rows = []
    for tok in str(params["t"]).split(","):
        t = float(tok)
        dens = pdiff.heat_measure(pdiff.HeatMeasureSpec(t, sym, p, M, N), mass_tolerance=0.05)
        w.write_text(f"heat_density_t{tok}.csv", dens.to_csv())
        h = float(params["h"])
        mk = lambda s: pdiff.heat_measure(
            pdiff.HeatMeasureSpec(s, sym, p, M, N), mass_tolerance=0.05
        )
        dd = (1.0 / (2 * h)) * (mk(t + h) - mk(t - h))
        au = pdiff.operator_apply(sym, dens)
        scale = float(np.abs(np.asarray(au.values)).max())
        resid = float(np.abs(np.asarray(dd.values) - np.asarray(au.values)).max()) / scale
        mass = gr.haar_integral(dens).real
        rows.append([tok, _fmt(mass), _fmt(np.asarray(dens.values).real.min()), _fmt(resid)])
    w.write_rows("heat.csv", ["t", "mass", "min_density", "cauchy_residual"], rows)
    w.finish()
    return 0


def _parse_matrix(text: str):
    return [[float(v) for v in row.split(",")] for row in str(text).split(";")]


def cmd_gauss_density(args):
    params = _resolve(args, {"q": "2.0", "corr": "1.0", "shift": ""})
    w = RunWriter(params, "gauss-density", args.stamp)
    shift = None
    if params["shift"]:
        shift = tuple(
            PAdicNumber.parse(tok).to_fraction() for tok in str(params["shift"]).split(";")
        )
    spec = qg.QGaussianSpec(
        float(params["q"]),
        _parse_matrix(params["corr"]),
        params["p"],
        params["level_m"],
        params["level_n"],
        shift=shift,
    )
    dens = qg.density(spec)
    w.write_text("gauss_density.csv", dens.to_csv())
    w.write_rows(
        "gauss-density.csv",
        ["mass", "min_density", "spec_hash"],
        [[_fmt(gr.haar_integral(dens).real), _fmt(np.asarray(dens.values).real.min()), spec.spec_hash()]],
    )
    w.finish()
    return 0


def cmd_gauss_moments(args):
    params = _resolve(args, {"q": "2.0", "corr": "1.0", "truncations": "1,2,3"})
    w = RunWriter(params, "gauss-moments", args.stamp)
    spec = qg.QGaussianSpec(
        float(params["q"]), _parse_matrix(params["corr"]), params["p"],
        params["level_m"], params["level_n"],
    )
    dens = qg.density(spec, allow_signed=True)
    B = spec.correlation
    rows = []
    for L in (int(t) for t in str(params["truncations"]).split(",")):
        m2 = qg.moment_numeric(spec, (0, 0), L, dens)
        m4 = qg.moment_numeric(spec, (0, 0, 0, 0), L, dens)
        rows.append(
            [
                L,
                _fmt(m2.value),
                _fmt(m4.value),
                _fmt(m4.value / m2.value**2 if m2.value else float("nan")),
                _fmt(qg.moment_wick(B, (0, 0))),
                _fmt(qg.moment_wick(B, (0, 0, 0, 0))),
            ]
        )
    w.write_rows(
        "gauss-moments.csv",
        ["truncation_exp", "m2", "m4", "ratio", "wick_m2", "wick_m4"],
        rows,
    )
    w.finish()
    return 0


def cmd_wiener(args):
    params = _resolve(args, {"q": "2.0", "corr": "1.0", "steps": "8", "horizon": "1.0"})
    w = RunWriter(params, "wiener", args.stamp)
    spec = qg.QGaussianSpec(
        float(params["q"]), _parse_matrix(params["corr"]), params["p"],
        params["level_m"], params["level_n"],
    )
    rng = np.random.default_rng(params["seed"])
    times = np.linspace(0.0, float(params["horizon"]), int(params["steps"]) + 1)
    path = qg.wiener_path(spec, times, rng, stream=f"seed{params['seed']}")
    w.write_text("wiener_path.csv", path.to_csv())
    count = params["samples"]
    inc = qg.wiener_increments(spec, 1, float(params["horizon"]), count, rng)[:, 0, :]
    batch = qg.SampleBatch(
        spec.prime, spec.support_exp, spec.resolution_exp, 0, inc, np.zeros_like(inc)
    )
    rows = []
    target = qg.QGaussianSpec(
        spec.q, spec.correlation * float(params["horizon"]), spec.prime,
        spec.support_exp, spec.resolution_exp,
    )
    for fr in (Fraction(1, 2), Fraction(3, 4), Fraction(1)):
        emp = batch.empirical_char((fr,))
        true = qg.char_functional(target, (PAdicNumber.from_fraction(fr, spec.prime),))
        rows.append([str(fr), _fmt(abs(emp - true)), _fmt(4.0 / np.sqrt(count))])
    w.write_rows("wiener.csv", ["z", "char_error", "clt_bound"], rows)
    w.finish()
    return 0


def cmd_ito_check(args):
    params = _resolve(args, {"partitions": "512,1024,2048"})
    w = RunWriter(params, "ito-check", args.stamp)
    spec = qg.QGaussianSpec(2.0, [[1.0]], params["p"], params["level_m"], params["level_n"])
    rep = qg.ito_check(
        {"const": lambda t: 1.0, "linear": lambda t: t},
        spec,
        (0.0, 1.0),
        [int(t) for t in str(params["partitions"]).split(",")],
        params["samples"],
        np.random.default_rng(params["seed"]),
    )
    rows = []
    for name, entries in rep.rows.items():
        for r in entries:
            rows.append([name, r.n_steps, _fmt(r.mean), _fmt(r.se_mean), _fmt(r.ratio), _fmt(r.se)])
    rows.append(["agreement", "", "", "", _fmt(rep.integrand_agreement), ""])
    rows.append(["max_drift", "", "", "", _fmt(rep.max_refinement_drift()), ""])
    w.write_rows(
        "ito-check.csv", ["integrand", "n_steps", "mean", "se_mean", "ratio", "se_ratio"], rows
    )
    w.finish()
    return 0


def _paving_from_params(params):
    if params.get("paving"):
        cells, masses = [], []
        for tok in str(params["paving"]).split(";"):
            lit, rexp, mass = tok.split("|")
            cells.append(lv.Ball(PAdicNumber.parse(lit), int(rexp)))
            masses.append(float(mass))
        return lv.IntensitySpec(tuple(cells), np.array(masses))
    centers = [Fraction(1, 2), Fraction(3, 2), Fraction(1, 4), Fraction(1)]
    masses = [0.6, 0.9, 0.4, 1.1]
    cells = [lv.Ball(PAdicNumber.from_fraction(c, 2), -2) for c in centers]
    return lv.IntensitySpec(tuple(cells), np.array(masses))


def _poisson_chunk(size, seedseq, masses):
    rng = np.random.default_rng(seedseq)
    return rng.poisson(masses, size=(size, len(masses)))


def cmd_poisson_counts(args):
    params = _resolve(args, {"paving": "", "samples": 100000})
    w = RunWriter(params, "poisson-counts", args.stamp)
    paving = _paving_from_params(params)
    worker = partial(_poisson_chunk, masses=paving.masses)
    chunks = run_chunked(worker, params["samples"], params["seed"], params["workers"])
    counts = np.concatenate(chunks, axis=0)
    rows = []
    for cell in range(len(paving.cells)):
        mean = counts[:, cell].mean()
        rows.append([cell, _fmt(paving.masses[cell]), _fmt(mean)])
    stat, dof, pval = lv.counting_law_chi_square(
        paving,
        params["samples"],
        np.random.default_rng(np.random.SeedSequence((params["seed"], 101))),
    )
    rows.append(["chi_square", _fmt(stat), _fmt(pval)])
    w.write_rows("poisson-counts.csv", ["cell", "mass_or_stat", "mean_or_p"], rows)
    w.finish()
    return 0 if pval > 0.01 else 3


def _jump_sum_chunk(size, seedseq, masses, pis):
    rng = np.random.default_rng(seedseq)
    counts = rng.poisson(masses, size=(size, len(pis)))
    return counts @ pis


def cmd_levy_laplace(args):
    params = _resolve(
        args, {"paving": "", "m0": "0.4", "a": "2.0", "t": "1.0", "rho": "0.5,1.0,2.0", "samples": 100000}
    )
    w = RunWriter(params, "levy-laplace", args.stamp)
    paving = _paving_from_params(params)
    # default paving avoids zero already (spheres)
    spec = lv.JumpFunctionalSpec(float(params["m0"]), paving, a=float(params["a"]))
    rhos = [float(t) for t in str(params["rho"]).split(",")]
    t = float(params["t"])
    psi = lv.levy_exponent(spec)
    pis = spec.cell_values()
    worker = partial(_jump_sum_chunk, masses=paving.masses * t, pis=pis)
    chunks = run_chunked(worker, params["samples"], params["seed"], params["workers"])
    jump_sums = np.concatenate(chunks)
    trace = t * spec.drift + jump_sums
    rows = []
    ok = True
    for rho in rhos:
        vals = np.exp(-rho * trace)
        emp, se = float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))
        exact = float(np.exp(-t * psi(rho)))
        sig = abs(emp - exact) / se if se else 0.0
        ok &= sig <= 4.0
        rows.append([_fmt(rho), _fmt(emp), _fmt(exact), _fmt(se), _fmt(sig)])
    w.write_rows("levy-laplace.csv", ["rho", "empirical", "exact", "se", "sigmas"], rows)
    w.finish()
    return 0 if ok else 3


def _gamma_field_from_params(params):
    """Christoffel table syntax: semicolon-separated entries
    ``i,j,l|coefficient`` (constant, exact rational) or
    ``i,j,l|e_1,..,e_d|literal`` (monomial exponents, p-adic literal)."""
    p = params["p"]
    if not params.get("christoffel"):
        return geo.ChristoffelField.constant("U", p, 1, {(0, 0, 0): Fraction(p)})
    entries = []
    for tok in str(params["christoffel"]).split(";"):
        parts = tok.split("|")
        i, j, l = (int(x) for x in parts[0].split(","))
        if len(parts) == 2:
            entries.append(((i, j, l), None, PAdicNumber.from_fraction(Fraction(parts[1]), p)))
        elif len(parts) == 3:
            exps = tuple(int(x) for x in parts[1].split(","))
            entries.append(((i, j, l), exps, PAdicNumber.parse(parts[2])))
        else:
            raise ConfigError(f"bad christoffel entry {tok!r}")
    dim = max(
        max(1 + max(key) for key, _, _ in entries),
        max((len(e) for _, e, _ in entries if e is not None), default=1),
    )
    table = {}
    for key, exps, coeff in entries:
        exps = exps if exps is not None else (0,) * dim
        if len(exps) != dim:
            raise ConfigError("christoffel monomial exponents must match the dimension")
        poly = table.setdefault(key, geo.PolyScalar(p, dim, {}))
        poly.coeffs[exps] = coeff
    return geo.ChristoffelField("U", p, dim, table)


def cmd_geodesic(args):
    params = _resolve(args, {"christoffel": "", "x0": "", "y0": "", "grid": "8"})
    w = RunWriter(params, "geodesic", args.stamp)
    p = params["p"]
    gamma = _gamma_field_from_params(params)
    d = gamma.dim
    x0 = tuple(
        PAdicNumber.parse(tok) for tok in str(params["x0"]).split(";")
    ) if params["x0"] else (PAdicNumber.zero(p),) * d
    y0 = tuple(
        PAdicNumber.parse(tok) for tok in str(params["y0"]).split(";")
    ) if params["y0"] else (PAdicNumber.from_int(p**3, p),) * d
    res = geo.geodesic_solve(gamma, x0, y0)
    rows = []
    for bv in range(int(params["grid"])):
        b = Fraction(bv * p**res.scale_exp)
        pt = res.eval(b)
        rows.append([str(b)] + [x.literal() for x in pt])
    w.write_rows("geodesic.csv", ["b"] + [f"c{i}" for i in range(d)], rows)
    w.write_rows(
        "geodesic_report.csv",
        ["scale_exp", "contraction", "iterations", "residual", "observed_ratio"],
        [[res.scale_exp, _fmt(res.contraction), res.iterations, _fmt(res.residual), _fmt(res.observed_ratio())]],
    )
    w.finish()
    return 0


def cmd_exp_map(args):
    params = _resolve(args, {"christoffel": "", "x0": "", "tangent": ""})
    w = RunWriter(params, "exp-map", args.stamp)
    p = params["p"]
    gamma = _gamma_field_from_params(params)
    d = gamma.dim
    x0 = tuple(
        PAdicNumber.parse(tok) for tok in str(params["x0"]).split(";")
    ) if params["x0"] else (PAdicNumber.zero(p),) * d
    tangent = tuple(
        PAdicNumber.parse(tok) for tok in str(params["tangent"]).split(";")
    ) if params["tangent"] else (PAdicNumber.from_int(p**4, p),) * d
    out = geo.exp_map(gamma, x0, tangent)
    w.write_rows(
        "exp-map.csv",
        [f"exp{i}" for i in range(d)],
        [[x.literal() for x in out]],
    )
    w.finish()
    return 0


def cmd_sde_solve(args):
    params = _resolve(
        args, {"level": "3", "radius_exp": "0", "drift": "1", "noise": "0", "paths": "1", "xi0": "0"}
    )
    w = RunWriter(params, "sde-solve", args.stamp)
    p = params["p"]
    scheme = sde.PartitionScheme(p, int(params["radius_exp"]), int(params["level"]))
    fld = sde.CoeffField.constants(
        p, 1, [Fraction(params["drift"])], [[Fraction(params["noise"])]]
    )
    spec = sde.SdeSpec(fld)
    n_paths = int(params["paths"])
    if Fraction(params["noise"]) != 0:
        qspec = qg.QGaussianSpec(2.0, [[1.0]], p, 1, 2)
        driver = sde.wiener_driver(
            qspec, scheme, n_paths, np.random.default_rng(params["seed"])
        )
    else:
        driver = sde.zero_driver(scheme, 1, n_paths)
    report = []
    for path in range(n_paths):
        sol = sde.solve_sde(spec, (Fraction(params["xi0"]),), scheme, driver, path)
        w.write_text(f"sde_path{path}.csv", sol.to_csv())
        report.append(
            [path, sol.iterations, _fmt(sol.residual), _fmt(sol.contraction)]
        )
    w.write_rows("sde-solve.csv", ["path", "iterations", "residual", "contraction"], report)
    w.finish()
    return 0


def cmd_cocycle_check(args):
    params = _resolve(args, {"pairs": "50"})
    w = RunWriter(params, "cocycle-check", args.stamp)
    p = params["p"]
    rng = np.random.default_rng(params["seed"])
    worst = 0.0
    for _ in range(int(params["pairs"])):
        c = [int(v) or 1 for v in rng.integers(-9, 9, size=4)]
        phi = sde.PolyFunction(
            (geo.PolyScalar(p, 1, {(2,): PAdicNumber.from_int(c[0], p), (1,): PAdicNumber.from_int(c[1], p)}),)
        )
        psi = sde.PolyFunction(
            (geo.PolyScalar(p, 1, {(2,): PAdicNumber.from_int(c[2], p), (0,): PAdicNumber.from_int(c[3], p)}),)
        )
        x = (Fraction(int(rng.integers(-20, 20))),)
        lhs = sde.ito_transform_J(phi.compose(psi), x)[0][0]
        rhs = sde.ito_transform_J(phi, psi.eval(x))[0][0] * sde.ito_transform_J(psi, x)[0][0]
        worst = max(worst, sde.fraction_norm(lhs - rhs, p))
    tol = float(p) ** (-20)
    w.write_rows("cocycle-check.csv", ["worst_residual", "tolerance"], [[_fmt(worst), _fmt(tol)]])
    w.finish()
    return 0 if worst <= tol else 3


def cmd_evolution(args):
    params = _resolve(args, {"level": "3"})
    w = RunWriter(params, "evolution", args.stamp)
    p = params["p"]
    scheme = sde.PartitionScheme(p, 0, int(params["level"]))
    spec = sde.SdeSpec(sde.CoeffField.constants(p, 1, [1], [[p**2]]))
    qspec = qg.QGaussianSpec(2.0, [[1.0]], p, 1, 2)
    driver = sde.wiener_driver(qspec, scheme, 1, np.random.default_rng(params["seed"]))
    man = sde.ManifoldSpec(
        {"U": ((Fraction(0),), scheme.level)},
        {"U": geo.ChristoffelField.zero("U", p, 1)},
        {},
        spec,
    )
    ev = sde.EvolutionFamily(man, scheme, driver)
    rows = []
    ok = True
    x0 = (Fraction(1),)
    for j in (scheme.size - 1, scheme.size // 2):
        for k in (1, 2):
            s_idx = scheme.sigma_index(j, k)
            direct = ev.apply(x0, j, 0)
            mid = ev.apply(x0, s_idx, 0)
            comp = ev.apply(mid.end_state, j, s_idx)
            match = comp.end_state == direct.end_state
            ok &= match
            rows.append([j, s_idx, int(match), int(direct.escaped)])
    w.write_rows("evolution.csv", ["target", "mid", "evolution_ok", "escaped"], rows)
    w.finish()
    return 0 if ok else 3


def cmd_acceptance(args):
    params = _resolve(args)
    w = RunWriter(params, "acceptance", args.stamp)
    indices = None
    if getattr(args, "only", None):
        indices = {int(t) for t in args.only.split(",")}
    results = acceptance.run_all(params["seed"], indices)
    w.write_text("acceptance.csv", acceptance.summary_csv(results))
    for r in results:
        w.write_text(f"acceptance_{r.index:02d}_{r.name}.csv", r.detail_csv())
    w.write_text(
        "acceptance_summary.json",
        json.dumps(acceptance.summary_manifest(results, params["seed"]), indent=2, sort_keys=True),
    )
    w.finish()
    for r in results:
        print(f"criterion {r.index:2d} {r.name:<14} {'PASS' if r.passed else 'FAIL'}")
    return 0 if all(r.passed for r in results) else 3


HANDLERS = {
    "gamma": cmd_gamma,
    "fourier-check": cmd_fourier_check,
    "vladimirov": cmd_vladimirov,
    "heat": cmd_heat,
    "gauss-density": cmd_gauss_density,
    "gauss-moments": cmd_gauss_moments,
    "wiener": cmd_wiener,
    "ito-check": cmd_ito_check,
    "poisson-counts": cmd_poisson_counts,
    "levy-laplace": cmd_levy_laplace,
    "geodesic": cmd_geodesic,
    "exp-map": cmd_exp_map,
    "sde-solve": cmd_sde_solve,
    "cocycle-check": cmd_cocycle_check,
    "evolution": cmd_evolution,
    "acceptance": cmd_acceptance,
}

EXTRA_FLAGS = {
    "gamma": ["u"],
    "vladimirov": ["n", "u"],
    "heat": ["t", "b", "h"],
    "gauss-density": ["q", "corr", "shift"],
    "gauss-moments": ["q", "corr", "truncations"],
    "wiener": ["q", "corr", "steps", "horizon"],
    "ito-check": ["partitions"],
    "poisson-counts": ["paving"],
    "levy-laplace": ["paving", "m0", "a", "t", "rho"],
    "geodesic": ["christoffel", "x0", "y0", "grid"],
    "exp-map": ["christoffel", "x0", "tangent"],
    "sde-solve": ["level", "radius_exp", "drift", "noise", "paths", "xi0"],
    "cocycle-check": ["pairs"],
    "evolution": ["level"],
    "acceptance": ["only"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicstoch",
        description="p-adic stochastic analysis batch driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--p", type=int, default=None)
        sp.add_argument("--precision", type=int, default=None)
        sp.add_argument("--level-m", dest="level_m", type=int, default=None)
        sp.add_argument("--level-n", dest="level_n", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--stamp", action="store_true")
        for flag in EXTRA_FLAGS.get(name, []):
            sp.add_argument(f"--{flag.replace('_', '-')}", dest=flag, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        precision = getattr(args, "precision", None)
        if precision:
            set_default_precision(int(precision))
        return HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
