import math

import numpy as np
import pytest
import scipy.linalg

from adimaxwell.diagnostics import energy, splitting_energy
from adimaxwell.grid import COMPONENTS, E_COMPONENTS, FieldState, make_grid, random_state, zero_state
from adimaxwell.harness import corner_inclusion_boxes, polynomial_ramp_source
from adimaxwell.materials import build_material_map
from adimaxwell.operators import apply_maxwell, weighted_norm
from adimaxwell.stepper import NO_SOURCE, SourceTerm, StepConfig, pr_step, run


@pytest.fixture(scope="module")
def small():
    g = make_grid((3, 4, 3))
    m = build_material_map(g, corner_inclusion_boxes())
    free = np.flatnonzero(np.concatenate([(~g.pec_mask(c)).ravel() for c in COMPONENTS]))
    cols = []
    for n in free:
        v = np.zeros(g.dof_count())
        v[n] = 1.0
        cols.append(apply_maxwell(FieldState.from_flat(g, v), m).flat()[free])
    return g, m, free, np.array(cols).T


def _embed(g, free, vec, t=0.0):
    full = np.zeros(g.dof_count())
    full[free] = vec
    return FieldState.from_flat(g, full, time=t)


def test_zero_state_stays_zero(jump_map8, grid8):
    w = pr_step(zero_state(grid8), 0.1, material=jump_map8)
    assert not w.flat().any()
    assert w.time == pytest.approx(0.1)


def test_step_does_not_mutate_input(jump_map8, rng):
    s = random_state(jump_map8.grid, rng)
    before = s.flat().copy()
    pr_step(s, 0.2, material=jump_map8)
    assert np.array_equal(before, s.flat())


@pytest.mark.parametrize("tau", [0.01, 0.05, 0.4, 3.0])
def test_splitting_energy_conserved(tau, jump_map8, rng):
    w = random_state(jump_map8.grid, rng)
    e0 = splitting_energy(w, jump_map8, tau)
    for _ in range(20):
        w = pr_step(w, tau, material=jump_map8)
    assert splitting_energy(w, jump_map8, tau) == pytest.approx(e0, rel=1e-12)


@pytest.mark.parametrize("tau", [0.05, 1.25])
def test_norm_bounded_without_step_restriction(tau, jump_map8, rng):
    w = random_state(jump_map8.grid, rng)
    bound = math.sqrt(splitting_energy(w, jump_map8, tau))
    for _ in range(40):
        w = pr_step(w, tau, material=jump_map8)
        assert weighted_norm(w, jump_map8) <= bound * (1 + 1e-12)


def test_local_error_third_order(small, rng):
    g, m, free, M = small
    x0 = rng.standard_normal(free.size)
    errs = []
    for tau in (0.01, 0.005, 0.0025):  # tau * spectral radius well below 1
        exact = scipy.linalg.expm(tau * M) @ x0
        got = pr_step(_embed(g, free, x0), tau, material=m).flat()[free]
        errs.append(np.linalg.norm(got - exact))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(r == pytest.approx(3.0, abs=0.1) for r in rates)


def test_global_second_order_with_source(small):
    g, m, free, M = small
    src = polynomial_ramp_source({"amplitude": 2.0})
    # J is linear in t, so w' = M w + t g is solved exactly by an augmented exponential
    j = src.sample(g, 1.0)
    gvec = zero_state(g)
    for c in E_COMPONENTS:
        gvec[c][...] = -m.inv_eps_at[c] * j[c]
    gvec.enforce_pec()
    n = free.size
    aug = np.zeros((n + 2, n + 2))
    aug[:n, :n] = M
    aug[:n, n] = gvec.flat()[free]
    aug[n, n + 1] = 1.0
    rng = np.random.default_rng(7)
    x0 = rng.standard_normal(n)
    z0 = np.concatenate([x0, [0.0, 1.0]])
    t_end = 0.5
    exact = (scipy.linalg.expm(t_end * aug) @ z0)[:n]
    errs = []
    for steps in (80, 160, 320):
        traj = run(_embed(g, free, x0), StepConfig(t_end / steps, t_end, 1000), src, m)
        errs.append(np.linalg.norm(traj.final.flat()[free] - exact))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(r == pytest.approx(2.0, abs=0.1) for r in rates)


@pytest.mark.parametrize("tau", [0.01, 0.25, 2.0])
def test_time_reversible(tau, jump_map8, rng):
    w0 = random_state(jump_map8.grid, rng)
    w = pr_step(pr_step(w0, tau, material=jump_map8), -tau, material=jump_map8)
    assert np.linalg.norm(w.flat() - w0.flat()) <= 1e-12 * np.linalg.norm(w0.flat())
    assert w.time == pytest.approx(0.0, abs=1e-15)


def test_pr_step_argument_checks(jump_map8, grid8):
    with pytest.raises(ValueError):
        pr_step(zero_state(grid8), 0.0, material=jump_map8)
    with pytest.raises(ValueError):
        pr_step(zero_state(grid8), 0.1)


def test_source_enters_at_leading_order_as_current(jump_map8, grid8):
    src = SourceTerm(lambda t, c, x, y, z: (c == "e3") * (1.0 + 0 * x), "const J3")
    devs = []
    for tau in (1e-3, 5e-4):
        w = pr_step(zero_state(grid8), tau, source=src, material=jump_map8)
        assert not w.e3[grid8.pec_mask("e3")].any()
        lead = zero_state(grid8)
        lead.e3[...] = -tau * jump_map8.inv_eps_at["e3"]
        lead.enforce_pec()
        devs.append(np.linalg.norm(w.flat() - lead.flat()) / np.linalg.norm(lead.flat()))
    # one step is E3 -= tau J3 / eps up to a relative O(tau) correction
    assert devs[0] / devs[1] == pytest.approx(2.0, rel=0.05)


@pytest.mark.parametrize(
    "tau, t_final, every, n_steps, n_records",
    [(0.1, 1.0, 1, 10, 11), (0.1, 1.0, 3, 10, 5), (0.3, 1.0, 1, 3, 4), (1 / 3, 1.0, 2, 3, 3)],
)
def test_run_counts(tau, t_final, every, n_steps, n_records, jump_map8, grid8):
    cfg = StepConfig(tau, t_final, every)
    traj = run(zero_state(grid8), cfg, NO_SOURCE, jump_map8, probes=("energy",))
    assert traj.steps == n_steps == cfg.n_steps
    assert len(traj.times) == len(traj.diagnostics) == n_records
    assert traj.times[0] == 0.0
    assert traj.end_time == pytest.approx(n_steps * tau, rel=1e-15)


def test_run_energy_probe(jump_map8, rng):
    w = random_state(jump_map8.grid, rng)
    traj = run(w, StepConfig(0.1, 0.5), NO_SOURCE, jump_map8, probes=("energy", "splitting_energy"))
    assert traj.diagnostics[0]["energy"] == pytest.approx(energy(w, jump_map8), rel=1e-15)
    se = [d["splitting_energy"] for d in traj.diagnostics]
    assert np.ptp(se) <= 1e-12 * se[0]


def test_run_matches_repeated_steps(jump_map8, rng):
    w = random_state(jump_map8.grid, rng)
    traj = run(w, StepConfig(0.1, 0.3), NO_SOURCE, jump_map8, keep_snapshots=True)
    manual = w
    for _ in range(3):
        manual = pr_step(manual, 0.1, material=jump_map8)
    assert np.array_equal(traj.final.flat(), manual.flat())
    assert len(traj.snapshots) == 4


@pytest.mark.parametrize("kwargs", [dict(tau=0.0, t_final=1.0), dict(tau=2.0, t_final=1.0),
                                    dict(tau=0.1, t_final=1.0, record_every=0)])
def test_step_config_validation(kwargs):
    with pytest.raises(ValueError):
        StepConfig(**kwargs)


def test_step_count_forgives_round_off():
    assert StepConfig(0.1, 1.0).n_steps == 10
    assert StepConfig(1 / 160, 1.0).n_steps == 160
    assert StepConfig(1 / 2560, 1.0).n_steps == 2560
