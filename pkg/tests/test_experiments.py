import json
import math

import numpy as np
import pytest

from waveguide_nls import make_geometry, sobolev_norm, tile_cubes
from waveguide_nls.experiments import (KINDS, ConfigError, default_config, evaluate, loglog_fit,
                                       parse_config, recheck, run_experiment)
from waveguide_nls.experiments.common import even_fast_len, max_index, run_tasks, time_samples
from waveguide_nls.experiments.dynamics import make_data
from waveguide_nls.experiments.scaling import (bilinear_data, bilinear_member, dirichlet_coefficients,
                                               strichartz_grid, strichartz_integrals,
                                               strichartz_ratios)
from waveguide_nls.norms import trapezoid_weights
from waveguide_nls.projectors import cube_mask, leq_multiplier
from waveguide_nls.spectral import fft_forward, fft_inverse, gaussian, pad_coefficients

SMALL_D3 = [["line", 8, 32], ["torus", 1, 8], ["torus", 1, 8]]


# configuration

@pytest.mark.parametrize("kind", KINDS)
def test_defaults_parse_and_round_trip(kind):
    cfg = default_config(kind)
    assert cfg.kind == kind and cfg.schema == "waveguide-nls/1"
    again = parse_config(cfg.to_json())
    assert again == cfg


def test_partial_override_keeps_defaults():
    cfg = parse_config({"kind": "conservation", "solver": {"dt": 5e-3}})
    assert cfg.solver == {"dt": 5e-3, "t_final": 1.0, "stride": 10, "padding": 2}
    cfg = cfg.with_overrides(seed=9, ensemble=None)
    assert cfg.seed == 9


@pytest.mark.parametrize("data, key, text", [
    ({"kind": "strichartz", "sweep": {"N": [2, 3]}}, "sweep.N", "N must be dyadic"),
    ({"kind": "nope"}, "kind", "unknown kind"),
    ({"kind": "tail", "extra": 1}, "extra", "unknown top-level key"),
    ({"kind": "tail", "schema": "v0"}, "schema", "unsupported schema"),
    ({"kind": "conservation", "geometry": [["torus", 1, 8], ["torus", 1, 8]]}, "geometry", "dimension"),
    ({"kind": "bilinear", "sweep": {"N1": [2, 4], "N2": [4]}}, "sweep.N2", "N2 <= N1"),
    ({"kind": "bilinear", "params": {"T": 1.0}}, "params.T", "0 < T < 1"),
    ({"kind": "picard", "params": {"T": 2.0}}, "params.T", "<= 1"),
    ({"kind": "smalldata", "equation": {"kappas": [2]}}, "equation.kappas", r"\+1/-1"),
    ({"kind": "conservation", "solver": {"dt": 0.3}}, "solver.t_final", "integer"),
    ({"kind": "conservation", "solver": {"padding": 3}}, "solver.padding", "1 or 2"),
    ({"kind": "tail", "params": {"N": 8}}, "params.N", "Nyquist"),
    ({"kind": "strichartz", "params": {"grid": "fixed"}}, "sweep.N", "Nyquist"),
    ({"kind": "strichartz", "ensemble": 0}, "ensemble", "positive"),
    ({"kind": "strichartz", "geometry": [["torus", 1, 7]]}, "geometry", "even"),
])
def test_config_errors(data, key, text):
    with pytest.raises(ConfigError, match=text) as info:
        parse_config(data)
    assert info.value.key == key


# helpers

def test_loglog_fit_exact_power():
    x = np.array([2, 4, 8, 16.0])
    slope, intercept, res = loglog_fit(x, 3 * x ** 0.75)
    assert slope == pytest.approx(0.75) and math.exp(intercept) == pytest.approx(3) and res < 1e-25
    with pytest.raises(ValueError):
        loglog_fit([2], [1])
    with pytest.raises(ValueError):
        loglog_fit([1, 2], [0, 1])


def test_common_helpers():
    assert [even_fast_len(n) for n in (5, 9, 31, 67)] == [6, 10, 32, 70]
    d = make_geometry([("line", 8, 64)]).directions[0]
    assert max_index(d, 2) == 16 and max_index(d, 2, strict=True) == 15
    assert time_samples(1.0, 16, 0.25) == 1024
    assert run_tasks(lambda x: x * x, range(7), threads=3) == [x * x for x in range(7)]


# Strichartz kernel

def _direct_lp(geometry, coeffs, p, window, steps):
    times = np.linspace(0, window, steps + 1)
    vals = [np.sum(np.abs(fft_inverse(geometry, coeffs * np.exp(-1j * t * geometry.freq_sq))) ** p)
            * geometry.cell_volume for t in times]
    return float(np.dot(trapezoid_weights(times), vals))


def test_strichartz_integrals_match_direct():
    g = strichartz_grid(make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]]), 2, 4)
    rng = np.random.default_rng(1)
    c = dirichlet_coefficients(g, 2) * (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    got = strichartz_integrals(g, c, [4.0, 3.0], 0.5, 70)
    assert got[0] == pytest.approx(_direct_lp(g, c, 4, 0.5, 70), rel=1e-11)
    assert got[1] == pytest.approx(_direct_lp(g, c, 3, 0.5, 70), rel=1e-11)


def test_strichartz_exact_grid_is_exact():
    # the L^4 Riemann sum on the exact grid equals the one on a much finer grid
    small = make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]])
    g = strichartz_grid(small, 2, 4)
    fine = g.refined(2)
    c = dirichlet_coefficients(g, 2)
    a = strichartz_integrals(g, c, [4.0], 0.3, 5)[0]
    b = strichartz_integrals(fine, pad_coefficients(c, g, fine), [4.0], 0.3, 5)[0]
    assert a == pytest.approx(b, rel=1e-12)


def test_plane_wave_strichartz_ratio_is_constant():
    small = make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]])
    ratios = []
    for N in (2, 4, 8):
        g = strichartz_grid(small, N, 4)
        c = np.zeros(g.shape, dtype=complex)
        c[1, 0, 1] = 1.0
        ratios.append(strichartz_ratios(g, c, [4.0], 1.0, 9)[0])
        want = g.volume ** 0.25 / math.sqrt(g.volume)
        assert ratios[-1] == pytest.approx(want, rel=1e-12)
    assert loglog_fit([2, 4, 8], ratios)[0] == pytest.approx(0, abs=1e-12)


def test_strichartz_zero_data():
    g = make_geometry(SMALL_D3)
    assert strichartz_ratios(g, np.zeros(g.shape), [4.0], 1.0, 4).tolist() == [0.0]


def test_euclidean_sanity_bounded_slope():
    # all-line geometry, admissible exponent 2/p + 3/p = 3/2, decaying data
    g = make_geometry([("line", 4, 64)] * 3)
    f = gaussian(g, width=1.0)
    c0 = fft_forward(g, f.values)
    Ns, ratios = [1, 2, 4], []
    for N in Ns:
        c = c0 * leq_multiplier(g, N)
        ratios.append(strichartz_ratios(g, c, [10 / 3], 1.0, time_samples(1.0, N, 0.5))[0])
    assert loglog_fit(Ns, ratios)[0] <= 0.1


def test_strichartz_evaluate_flags():
    cfg = parse_config({"kind": "strichartz", "sweep": {"N": [2, 4, 8], "p": [3.0, 10 / 3, 4.0]}})
    recs = [{"N": N, "p": p, "member": m, "ratio": (1 + m) * N ** 0.5}
            for p in (3.0, 10 / 3, 4.0) for N in (2, 4, 8) for m in range(3)]
    summary, crit = evaluate(cfg, recs)
    status = [f["status"] for f in summary["fits"]]
    assert status == ["outside theorem range", "endpoint: inconclusive by design", "in range"]
    assert all(f["slope"] == pytest.approx(0.5) for f in summary["fits"])
    # sup is taken over the ensemble
    assert summary["fits"][0]["sup"][0][1] == pytest.approx(3 * 2 ** 0.5)
    assert crit[2]["threshold"] == pytest.approx(0.75 + 0.1)
    assert crit[1]["threshold"] == pytest.approx(3 / 2 - 3 / (10 / 3) + 0.2)


# bilinear kernel

def _direct_bilinear(g, fc, gs, gc, N2, window, steps):
    gb = pad_coefficients(gc, gs, g)
    times = np.linspace(0, window, steps + 1)
    w = trapezoid_weights(times)
    cubes = list(tile_cubes(g, N2))
    uv = audit = 0.0
    for wk, t in zip(w, times):
        ph = np.exp(-1j * t * g.freq_sq)
        u = fft_inverse(g, fc * ph)
        v = fft_inverse(g, gb * ph)
        uv += wk * np.sum(np.abs(u * v) ** 2) * g.cell_volume
        for c in cubes:
            m = cube_mask(g, c, N2)
            if not np.any(fc[m]):
                continue
            uj = fft_inverse(g, fc * m * ph)
            audit += wk * np.sum(np.abs(uj * v) ** 2) * g.cell_volume
    return uv, audit


def test_bilinear_member_matches_direct():
    base = make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]])
    g, fc, lows = bilinear_data(base, 2, [1], seed=3, member=0)
    (uv, audit), = bilinear_member(g, fc, 2, lows, 0.25, 4)
    N2, gs, gc = lows[0]
    want_uv, want_audit = _direct_bilinear(g, fc, gs, gc, N2, 0.25, 4)
    assert uv == pytest.approx(want_uv, rel=1e-10)
    assert audit == pytest.approx(want_audit, rel=1e-10)


def test_bilinear_swap_symmetry():
    base = make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]])
    g, fc, lows = bilinear_data(base, 2, [2], seed=5, member=1)
    _, gs, gc = lows[0]
    assert gs.shape == g.shape
    (a, _), = bilinear_member(g, fc, 2, lows, 0.25, 4, audit=False)
    (b, _), = bilinear_member(g, gc, 2, [(2, g, fc)], 0.25, 4, audit=False)
    assert a == pytest.approx(b, rel=1e-12)


def test_bilinear_zero_data():
    base = make_geometry([["line", 1, 8], ["torus", 1, 8], ["torus", 1, 8]])
    g, fc, lows = bilinear_data(base, 2, [1], seed=0, member=0)
    (uv, audit), = bilinear_member(g, fc * 0, 2, lows, 0.25, 4)
    assert uv == 0 and audit == 0


# small end-to-end runs

SMALL = {
    "strichartz": {"kind": "strichartz", "ensemble": 3, "sweep": {"N": [2, 4], "p": [4.0]}},
    "bilinear": {"kind": "bilinear", "ensemble": 2, "sweep": {"N1": [2, 4], "N2": [1]}},
    "conservation": {"kind": "conservation", "geometry": SMALL_D3,
                     "solver": {"dt": 1e-2, "t_final": 0.2, "stride": 5}},
    "smalldata": {"kind": "smalldata", "geometry": SMALL_D3, "solver": {"dt": 0.05, "t_final": 1.0}},
    "picard": {"kind": "picard", "geometry": SMALL_D3, "sweep": {"sizes": [0.0, 0.05, 0.5]},
               "params": {"samples": 8, "splitstep_substeps": 4}},
    "tail": {"kind": "tail", "geometry": SMALL_D3, "solver": {"dt": 0.01, "t_final": 0.1}},
    "focusing": {"kind": "focusing", "geometry": [["line", 1, 64], ["torus", 1, 4], ["torus", 1, 4]],
                 "solver": {"dt": 1e-3, "t_final": 0.1, "stride": 10},
                 "params": {"amplitudes": [0.5, 2.0]}},
}


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_determinism_across_threads(kind):
    cfg = parse_config(SMALL[kind])
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=2)
    assert a.records_json() == b.records_json()
    summary, criteria = recheck(a)
    assert json.dumps(criteria, sort_keys=True, default=str) == json.dumps(a.criteria, sort_keys=True, default=str)
    cols, rows = a.csv_rows()
    assert all(len(r) == len(cols) for r in rows)


def test_zero_data_conservation():
    cfg = parse_config(dict(SMALL["conservation"], params={"data": {"profile": "zero"}}))
    rep = run_experiment(cfg, threads=1)
    drifts = [r for r in rep.records if r.get("event") is None]
    assert all(r["mass_drift"] == 0 and r["energy_drift"] == 0 and r["momentum_drift"] == 0 for r in drifts)
    assert rep.passed


def test_zero_data_smalldata_and_picard():
    cfg = parse_config(dict(SMALL["smalldata"], params={"data": {"profile": "zero"}}))
    rep = run_experiment(cfg, threads=1)
    assert all(r["h1"] == 0 for r in rep.records if r.get("event") is None)
    assert rep.passed


def test_smalldata_defocusing_ratio():
    cfg = parse_config(dict(SMALL["smalldata"], equation={"kappas": [1]}))
    rep = run_experiment(cfg, threads=1)
    assert rep.summary["runs"][0]["sup_ratio"] <= 1.1


def test_focusing_without_negative_energy_fails():
    cfg = parse_config(dict(SMALL["focusing"], params={"amplitudes": [0.1, 0.2]}))
    rep = run_experiment(cfg, threads=1)
    assert not rep.passed and rep.summary["amplitude"] is None


def test_d4_focusing_small_data_conservation():
    cfg = parse_config({"kind": "conservation",
                        "geometry": [["line", 8, 32], ["torus", 1, 8], ["torus", 1, 8], ["torus", 1, 8]],
                        "equation": {"kappas": [-1]},
                        "solver": {"dt": 1e-3, "t_final": 0.2, "stride": 50},
                        "params": {"data": {"profile": "gaussian", "h1_norm": 0.05,
                                            "width": [1.5, 0.8, 0.8, 0.8], "frequency": None},
                                   "halving": False}})
    rep = run_experiment(cfg, threads=1)
    assert rep.passed, rep.criteria


def test_make_data_profiles(d3_small):
    u = make_data(d3_small, {"profile": "gaussian", "h1_norm": 0.3, "width": 1.0})
    assert sobolev_norm(u, 1) == pytest.approx(0.3)
    v = make_data(d3_small, {"profile": "gaussian", "width": [1.0, None, None]}, amplitude=2.0)
    assert np.allclose(v.values[:, 0, 0], v.values[:, 3, 5])
    with pytest.raises(ValueError):
        make_data(d3_small, {"profile": "square"})
