"""End-to-end acceptance checks, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary (see
``pytest_terminal_summary`` in conftest.py).
"""

import itertools
import json
import time

import numpy as np
import pytest

import oracles
from conftest import DATA, FIG3, FIG4, binary_channel, identical_outputs_channel, mi_battery, random_channel, \
    x1_blind_eavesdropper
from cmacsec import files
from cmacsec.cli import main
from cmacsec.coding import SimConfig, exact_equivocation, generate_codebook, run_trials
from cmacsec.dm_bounds import SweepConfig, sweep_inner, sweep_outer
from cmacsec.gaussian import (COMPOUND, CMACCM, GaussianParams, GaussianSweepConfig, PowerSplit,
                              cmaccm_inner_constraints, split_bounds, split_grid, sweep_gaussian)
from cmacsec.info import ConditionalPmf, InnerAuxLaw, Pmf, conditional_mutual_information, mutual_information
from cmacsec.region import compare, contains, convex_closure


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _closed_gaussian(params, mode, steps=21):
    return convex_closure(sweep_gaussian(GaussianParams(**params), GaussianSweepConfig(steps, mode)))


def test_criterion_1_fig3_reproduction():
    with Timer() as t:
        inner = _closed_gaussian(FIG3, CMACCM)
        comp = _closed_gaussian(FIG3, COMPOUND)
    assert inner.max_rate("r1") == pytest.approx(0.096323, abs=1e-5)
    assert comp.max_rate("r1") == pytest.approx(0.242713, abs=1e-5)
    assert inner.max_rate("r2") == pytest.approx(0.292481, abs=1e-5)
    assert comp.max_rate("r2") == pytest.approx(0.292481, abs=1e-5)
    assert t.elapsed < 10


def test_criterion_2_fig4_crossover():
    with Timer() as t:
        inner = _closed_gaussian(FIG4, CMACCM)
        comp = _closed_gaussian(FIG4, COMPOUND)
        report = compare(inner, comp)
    assert inner.max_rate("r1") == pytest.approx(0.270284, abs=1e-5)
    assert comp.max_rate("r1") == pytest.approx(0.068752, abs=1e-5)
    assert not report.a_in_b
    assert report.witnesses_a_not_in_b
    for w in report.witnesses_a_not_in_b:
        assert contains(inner, w) and not contains(comp, w, tol=report.tol)
    assert t.elapsed < 10


def test_criterion_3_r1_clamp():
    rng = np.random.default_rng(2718)
    with Timer() as t:
        for _ in range(100):
            h1 = rng.uniform(0, 3)
            gp = GaussianParams(h1=h1, h2=rng.uniform(0, 3), g1=h1 + rng.uniform(0, 3), g2=rng.uniform(0, 3),
                                p1=rng.uniform(0, 10), p2=rng.uniform(0, 10))
            splits = split_grid(gp, 11)
            coeffs, bounds = split_bounds(gp, CMACCM, splits)
            r1_row = [tuple(r) for r in coeffs.tolist()].index((0, 1, 0))
            assert np.all(bounds[:, r1_row] == 0.0)
            # the single-split constructor agrees on a few sampled splits
            for i in rng.choice(bounds.shape[0], size=3, replace=False):
                split = PowerSplit(*(float(s[i]) for s in splits))
                assert cmaccm_inner_constraints(gp, split).as_dict()["R1"] == 0.0
    assert t.elapsed < 5


def test_criterion_4_mi_oracle():
    with Timer() as t:
        for joint in mi_battery():
            cells = oracles.table_to_cells(joint.table.tolist())
            names = joint.var_names
            for ia, ib in itertools.permutations(range(len(names)), 2):
                rest = [i for i in range(len(names)) if i not in (ia, ib)]
                for r in range(len(rest) + 1):
                    for cond in itertools.combinations(rest, r):
                        got = conditional_mutual_information(joint, names[ia], names[ib],
                                                             tuple(names[i] for i in cond))
                        assert abs(got - oracles.cmi_direct(cells, [ia], [ib], list(cond))) <= 1e-9
                if rest:
                    c = names[rest[0]]
                    lhs = conditional_mutual_information(joint, (names[ia], names[ib]), c)
                    rhs = (mutual_information(joint, names[ia], c)
                           + conditional_mutual_information(joint, names[ib], c, names[ia]))
                    assert abs(lhs - rhs) <= 1e-9
    assert t.elapsed < 5


def _body(cloud, path):
    files.write_region_csv(path, cloud, timestamp=False)
    text = path.read_text()
    return text[text.index("R0,R1,R2"):]


def test_criterion_5_dm_golden(tmp_path):
    ch = binary_channel()
    with Timer() as t:
        inner = sweep_inner(ch, SweepConfig(k=2))
        outer = sweep_outer(ch, SweepConfig(k=2))
        assert _body(inner, tmp_path / "i.csv") == (DATA / "golden_inner_k2.csv").read_text()
        assert _body(outer, tmp_path / "o.csv") == (DATA / "golden_outer_k2.csv").read_text()
        for seed in range(3):
            assert sweep_inner(identical_outputs_channel(seed), SweepConfig(k=2)).max_rate("r1") == 0.0
    assert t.elapsed < 60


def test_criterion_6_inner_in_outer():
    battery = [binary_channel(), identical_outputs_channel(0), x1_blind_eavesdropper(), random_channel(1),
               random_channel(2)]
    failures = []
    with Timer() as t:
        for i, ch in enumerate(battery):
            inner = convex_closure(sweep_inner(ch, SweepConfig(k=2)))
            outer = convex_closure(sweep_outer(ch, SweepConfig(k=2)))
            report = compare(inner, outer, tol=1e-6)
            if not report.a_in_b:
                failures.append((i, report.witnesses_a_not_in_b[:1], report.max_a.tolist(), report.max_b.tolist()))
    assert t.elapsed < 60
    assert not failures, f"inner closure escapes the sampled outer closure: {failures}"


def test_criterion_7_simulator_exactness():
    ch, law = files.load_channel(DATA / "channel_wiretap.json"), files.load_law(DATA / "law_wiretap.json")
    law_doc, ch_doc = files.law_to_dict(law), ch.law.tolist()
    with Timer() as t:
        for seed in range(3):
            cb = generate_codebook(law, SimConfig(n=2, m1=2, bin_size=2, eps_typ=1.0, seed=seed))
            ref = oracles.total_enumeration_equivocation(cb.to_dict(), law_doc, ch_doc)
            assert abs(exact_equivocation(cb, ch) - ref) <= 1e-9
        for n, eps, m1, L in [(3, 1.0, 2, 2), (4, 1.0, 4, 1), (4, 1.5, 2, 2), (5, 1.0, 2, 2), (5, 2.0, 4, 1),
                              (6, 1.5, 2, 2), (6, 1.0, 4, 1)]:
            cfg = SimConfig(n=n, m1=m1, bin_size=L, eps_typ=eps, trials=1500, seed=n)
            cb = generate_codebook(law, cfg)
            exact = oracles.exact_error_probability(cb.to_dict(), law_doc, ch_doc, eps)
            sigma = np.sqrt(exact * (1 - exact) / cfg.trials)
            assert abs(run_trials(cb, ch, cfg).pe_estimate - exact) <= 4 * sigma
        half = ConditionalPmf([[0.5, 0.5], [0.5, 0.5]])
        uniform = InnerAuxLaw(Pmf([0.5, 0.5]), half, ConditionalPmf.identity(2), half)
        blind = x1_blind_eavesdropper()
        for seed in range(3):
            cfg = SimConfig(n=4, m0=2, m1=4, m2=2, bin_size=2, seed=seed)
            leakage = cfg.rates[1] - exact_equivocation(generate_codebook(uniform, cfg), blind)
            assert abs(leakage) <= 1e-9
    assert t.elapsed < 120


def _run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_8_reproducibility(tmp_path):
    law = {"p_u": [0.5, 0.5], "p_v1_given_u": [[0.5, 0.5], [0.5, 0.5]], "p_x1_given_v1": [[1, 0], [0, 1]],
           "p_x2_given_u": [[1, 0], [0, 1]]}
    runs = []
    with Timer() as t:
        for rep in range(2):
            out = tmp_path / f"run{rep}"
            out.mkdir()
            common = ["--no-timestamp"]
            assert _run("gaussian-region", *common, "--params", DATA / "fig3_params.json", "--mode", "cmaccm",
                        "--steps", 11, "-o", out / "g.csv") == 0
            assert _run("dm-region", *common, "--channel", DATA / "channel_binary.json", "--bound", "inner",
                        "--k", 1, "--samples", 200, "--seed", 9, "--json", "-o", out / "d.csv") == 0
            assert _run("dm-region", *common, "--channel", DATA / "channel_binary.json", "--bound", "outer",
                        "--k", 1, "--samples", 200, "--seed", 9, "-o", out / "o.csv") == 0
            assert _run("less-noisy", *common, "--channel", DATA / "channel_binary.json", "--k", 4,
                        "--samples", 50, "--seed", 9, "-o", out / "ln.json") == 0
            assert _run("compare", *common, out / "g.closure.csv", out / "d.closure.csv",
                        "--report", out / "cmp.json") == 0
            (out / "law.json").write_text(json.dumps(law))
            assert _run("simulate", *common, "--channel", DATA / "channel_wiretap.json", "--law", out / "law.json",
                        "--config", DATA / "sim_wiretap.json", "--seed", 5, "-o", out / "sim.json") == 0
            assert _run("simulate", *common, "--channel", DATA / "channel_wiretap.json", "--law", out / "law.json",
                        "--config", DATA / "sim_wiretap.json", "--monte-carlo", "--mc-samples", 200,
                        "-o", out / "sim_mc.json") == 0
            figs = out / "figs"
            figs.mkdir()
            assert _run("reproduce-figures", *common, "--output-dir", figs, "--steps", 11) == 0
            runs.append(_tree_bytes(out))
    assert t.elapsed < 30
    assert runs[0].keys() == runs[1].keys() and len(runs[0]) >= 17
    # report files echo their input paths, which differ between the two run directories
    for name in runs[0]:
        a, b = runs[0][name], runs[1][name]
        if name == "cmp.json":
            a, b = (json.loads(x) for x in (a, b))
            for doc in (a, b):
                doc.pop("a"), doc.pop("b")
        assert a == b, name
