import numpy as np
import pytest
from scipy.optimize import nnls

import psg


def ls_problem(seed=7, m=40, n=20):
    return psg.make_test_problem("ls", m, n, seed=seed, cond=20.0)


def test_projection_onto_box_and_orthant():
    box = psg.FeasibleSet.box(np.zeros(3), np.full(3, 2.0))
    np.testing.assert_array_equal(box.project(np.array([-1.0, 1.0, 5.0])), [0.0, 1.0, 2.0])
    orthant = psg.FeasibleSet.orthant(2)
    np.testing.assert_array_equal(psg.project(orthant, np.array([-3.0, 4.0])), [0.0, 4.0])
    assert orthant.kind == "orthant"
    assert box.bounded and not orthant.bounded


def test_run_matches_nnls():
    p = ls_problem()
    model = p.model
    x_ref, _ = nnls(*_normal_factor(model, np.eye(20)))
    rep = psg.run(model, p.set, psg.ScalingStrategy.identity(), psg.StepsizePolicy.constant(1.0 / model.L),
                  psg.OuterPerturbationPlan.summable_random(0.5, 0.9, 11), np.zeros(20))
    assert rep.termination == "residual-tol"
    assert rep.final_res_norm <= 1e-8
    assert np.linalg.norm(rep.final_x - x_ref) <= 1e-6
    assert rep.all_certificates_ok()
    assert set(rep.certificates) == set(psg.certificate_names())


def _normal_factor(model, basis):
    # Recover A'A and A'b from the gradient, then factor A'A = R'R so that
    # min ||R x - c|| has the same minimiser over x >= 0.
    n = basis.shape[0]
    g0 = model.gradient(np.zeros(n))
    H = np.column_stack([model.gradient(basis[:, j]) - g0 for j in range(n)])
    H = 0.5 * (H + H.T)
    R = np.linalg.cholesky(H).T
    c = np.linalg.solve(R.T, -g0)
    return R, c


def test_oracle_agrees_with_nnls():
    p = ls_problem(seed=3, m=30, n=12)
    sol = psg.solve_reference(p.model, p.set)
    x_ref, _ = nnls(*_normal_factor(p.model, np.eye(12)))
    assert np.linalg.norm(sol.x_star - x_ref) <= 1e-9
    assert sol.residual <= 1e-11


def test_superiorized_run_on_box():
    p = psg.make_test_problem("ls", 18, 9, seed=4, cond=20.0, set="box", lower=0.0, upper=2.0)
    sol = psg.solve_reference(p.model, p.set)
    rep = psg.run_superiorized(p.model, p.set, psg.ScalingStrategy.identity(),
                               psg.StepsizePolicy.constant(1.0 / p.model.L), psg.InnerPerturbationPlan(),
                               np.ones(9), compare=True, x_star=sol.x_star)
    assert rep.termination == "residual-tol"
    assert np.linalg.norm(rep.final_x - sol.x_star) <= 1e-6
    assert rep.certificates["e-bound"].status == "pass"
    assert rep.final_tv is not None and rep.baseline_tv is not None
    applied = [r for r in rep.records if r.sup.applied]
    assert applied
    assert all(r.e_norm <= rep.c_omega * r.sup.beta + 1e-9 for r in applied)


def test_em_step_matches_multiplicative_update():
    p = psg.make_test_problem("kl", 24, 6, seed=5, consistent=True)
    em = psg.ScalingStrategy.em_for(p.model)
    x = np.ones(6)
    trace = psg.bruteforce_em_trace(p.model, x, 20)
    for k in range(1, 21):
        x = x - psg.apply_scaling(em, x, p.model.gradient(x))
        np.testing.assert_allclose(x, trace[k], rtol=1e-12)


def test_inner_to_outer_reproduces_step():
    p = psg.make_test_problem("ls", 18, 9, seed=4, cond=20.0, set="box", lower=0.0, upper=2.0)
    s = psg.ScalingStrategy.identity()
    tau = 1.0 / p.model.L
    x = np.full(9, 1.0)
    v = np.linspace(-0.5, 0.5, 9)
    e = psg.inner_to_outer(p.model, s, tau, x, 0.3, v)
    y = x + 0.3 * v
    direct = p.set.project(y - tau * p.model.gradient(y))
    np.testing.assert_allclose(psg.psg_step(p.model, p.set, s, tau, x, e), direct, atol=1e-14)


def test_errors_carry_codes():
    with pytest.raises(psg.PsgError) as info:
        psg.StepsizePolicy.constant(-1.0)
    assert info.value.code == "invalid-argument"
    p = ls_problem()
    with pytest.raises(psg.PsgError) as info:
        psg.run(p.model, p.set, psg.ScalingStrategy.identity(), psg.StepsizePolicy.constant(2.5 / p.model.L),
                psg.OuterPerturbationPlan.none(), np.zeros(20))
    assert info.value.code == "invalid-argument"


def test_trace_and_report_text():
    p = ls_problem()
    rep = psg.run(p.model, p.set, psg.ScalingStrategy.identity(), psg.StepsizePolicy.constant(1.0 / p.model.L),
                  psg.OuterPerturbationPlan.none(), np.zeros(20), max_iters=5)
    assert rep.termination == "max-iters"
    lines = rep.trace_csv().splitlines()
    assert lines[0].startswith("# psg-trace v1")
    assert len(lines) == 3 + 5
    assert '"descent"' in rep.report_json()
