import math

import numpy as np
import pytest

import glassey_lab as gl


def make_setup(eps=0.05, p=2.5, cells=800, rmax=16.0, a=1.0, b=0.0):
    spec = gl.ProblemSpec(n_dim=3, p=p, a=a, b=b)
    g = gl.RadialGrid(r_max=rmax, num_cells=cells)
    prof = gl.DataProfile(family="gaussian", epsilon=eps, width=1.0, center=0.0,
                          assigns="split")
    data = gl.make_profile(prof, g)
    return spec, g, data


def test_phi_map_free_when_nonlinearity_off():
    spec, g, data = make_setup(a=0.0, b=0.0)
    free = gl.evolve(spec, data.u0, data.u1, g, 4.0, linear_only=True).trajectory
    mapped = gl.phi_map(free, data.u0, data.u1, g, 4.0)
    for sa, sb in zip(free.states, mapped.states):
        assert np.array_equal(sa.u.values, sb.u.values)
        assert np.array_equal(sa.v.values, sb.v.values)


def test_phi_map_zero_everything():
    spec, g, _ = make_setup(a=1.0)
    z = gl.RadialField.zeros(g)
    zero_traj = gl.evolve(spec, z, z, g, 4.0, linear_only=True).trajectory
    mapped = gl.phi_map(zero_traj, z, z, g, 4.0)
    assert all(not np.any(st.u.values) for st in mapped.states)


def test_phi_map_superposition():
    # phi[u] - free solve equals the zero-data source solve driven by N[u]
    spec, g, data = make_setup(eps=0.2)
    free = gl.evolve(spec, data.u0, data.u1, g, 4.0, linear_only=True).trajectory
    mapped = gl.phi_map(free, data.u0, data.u1, g, 4.0)
    from glassey_lab.picard import sampled_nonlinearity

    forced = gl.duhamel(sampled_nonlinearity(free), 4.0, spec, g)
    scale = max(np.max(np.abs(st.u.values)) for st in mapped.states)
    for sm, sf, sfr in zip(mapped.states, forced.states, free.states):
        resid = sm.u.values - (sfr.u.values + sf.u.values)
        assert np.max(np.abs(resid)) <= 1e-10 * scale


def test_picard_trivial_linear_case():
    spec, g, data = make_setup(a=0.0, b=0.0)
    res = gl.picard_run(spec, data.u0, data.u1, g, 4.0, max_iters=5, tol=1e-10)
    assert res.converged
    assert len(res.trace) == 1
    assert res.trace[0].rho_step <= 1e-12


def test_picard_contracts_small_data():
    spec, g, data = make_setup(eps=0.05)
    res = gl.picard_run(spec, data.u0, data.u1, g, 6.0, max_iters=10, tol=1e-8)
    assert res.converged
    rhos = [t.rho_step for t in res.trace]
    for r0, r1 in zip(rhos, rhos[1:]):
        assert r1 / r0 <= 0.9


def test_picard_fixed_point_residual():
    spec, g, data = make_setup(eps=0.05)
    tol = 1e-8
    res = gl.picard_run(spec, data.u0, data.u1, g, 6.0, max_iters=10, tol=tol)
    again = gl.phi_map(res.final, data.u0, data.u1, g, 6.0)
    rho = gl.rho_metric(again, res.final, res.weights)
    assert rho <= 2.0 * tol * res.lambda1


def test_picard_matches_direct_solve():
    spec, g, data = make_setup(eps=0.05)
    res = gl.picard_run(spec, data.u0, data.u1, g, 6.0, max_iters=10, tol=1e-8)
    direct = gl.evolve(spec, data.u0, data.u1, g, 6.0).trajectory
    dist = gl.e_norms(gl.trajectory_difference(res.final, direct)).e1
    assert dist <= 1e-3 * res.lambda1


def test_picard_divergence_detected():
    spec, g, data = make_setup(eps=6.0, cells=400)
    with pytest.raises(gl.Divergence) as err:
        gl.picard_run(spec, data.u0, data.u1, g, 6.0, max_iters=12, tol=1e-8)
    assert isinstance(err.value.trace, tuple)  # trace travels with the failure


def test_picard_contraction_monotone_in_data_size():
    worst = []
    for eps in (0.1, 0.05, 0.025):
        spec, g, data = make_setup(eps=eps, cells=400)
        res = gl.picard_run(spec, data.u0, data.u1, g, 4.0, max_iters=8, tol=1e-10)
        rhos = [t.rho_step for t in res.trace]
        ratios = [b / a for a, b in zip(rhos, rhos[1:])]
        worst.append(max(ratios))
    assert worst[1] <= worst[0] and worst[2] <= worst[1]


def test_picard_iter_gate():
    spec, g, data = make_setup()
    with pytest.raises(gl.PreconditionViolation):
        gl.picard_run(spec, data.u0, data.u1, g, 4.0, max_iters=1)
    with pytest.raises(gl.PreconditionViolation):
        gl.picard_run(spec, data.u0, data.u1, g, 4.0, max_iters=60)


def test_default_weights_by_regime():
    w_sup = gl.default_weights(gl.ProblemSpec(n_dim=3, p=2.5, a=1.0, b=0.0), 5.0)
    assert 0.0 < w_sup.delta < 0.5 and w_sup.delta_prime < w_sup.delta
    w_crit = gl.default_weights(gl.ProblemSpec(n_dim=3, p=2.0, a=1.0, b=0.0), 5.0)
    assert w_crit.delta_prime < w_crit.delta
    w_sub = gl.default_weights(gl.ProblemSpec(n_dim=3, p=1.5, a=1.0, b=0.0), 5.0)
    assert w_sub.delta == pytest.approx(0.25)


def test_smallness_report():
    spec, g, data = make_setup(eps=0.1)
    z = gl.RadialField.zeros(g)
    rep0 = gl.smallness_report(spec, z, z)
    assert rep0.quantity == 0.0

    rep = gl.smallness_report(spec, data.u0, data.u1, s1=0.5, s2=1.0)
    assert rep.regime == "supercritical"
    lam = gl.lambda_norms(data.u0, data.u1, 3)
    expect = (lam.lambda1 ** 0.5 * lam.lambda2 ** 0.5
              + lam.lambda1 ** 0.0 * lam.lambda2 ** 1.0)
    assert rep.quantity == pytest.approx(expect, rel=1e-12)

    rep2 = gl.smallness_report(spec, data.u0.scaled(2.0), data.u1.scaled(2.0),
                               s1=0.5, s2=1.0)
    assert rep2.quantity == pytest.approx(2.0 * rep.quantity, rel=1e-12)

    sub = gl.smallness_report(gl.ProblemSpec(n_dim=3, p=1.5, a=1.0, b=0.0),
                              data.u0, data.u1)
    assert sub.regime == "subcritical"
    assert sub.quantity == pytest.approx(math.sqrt(lam.lambda1 * lam.lambda2), rel=1e-12)
