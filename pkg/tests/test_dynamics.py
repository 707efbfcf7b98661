import numpy as np
import pytest

from bsd_kuramoto import domains, dynamics, flows, groups
from bsd_kuramoto.domains import DomainSpec
from bsd_kuramoto.dynamics import IntegrationConfig, Trajectory, integrate_ensemble, integrate_lift
from bsd_kuramoto.errors import DivergenceDetected, RankDeficient, ShapeMismatch, TooFarToRetract
from bsd_kuramoto.flows import EnsembleState, ModelSpec
from bsd_kuramoto.groups import GroupSpec

from conftest import ALL_TYPES, spec_id


def bs_ensemble(spec, N, seed=0):
    return EnsembleState(np.stack([domains.sample_bs_boundary(spec, seed * 1000 + k) for k in range(N)]))


def test_config_validation():
    for bad in (dict(dt=0), dict(t_end=-1), dict(method="euler"), dict(retract_every=-1), dict(monitor_every=0)):
        with pytest.raises(ValueError):
            IntegrationConfig(**bad)
    cfg = IntegrationConfig(dt=0.3, t_end=1.0, tolerances={"rank": 1e-6})
    assert cfg.n_steps == 3 and cfg.step == pytest.approx(1 / 3)
    assert cfg.tolerances["rank"] == 1e-6 and cfg.tolerances["retract"] == 1e-9


def test_trajectory_times_increase():
    tr = Trajectory()
    rec = None
    tr.append(EnsembleState(np.eye(1), 0.0), rec)
    with pytest.raises(ValueError):
        tr.append(EnsembleState(np.eye(1), 0.0), rec)


def test_rk4_exact_for_cubic():
    # y' = 3 t^2 written autonomously as (t, y)' = (1, 3 t^2): RK4 is exact for cubics
    f = lambda y: np.array([1.0, 3 * y[0] ** 2])
    y = np.array([0.0, 0.0])
    for _ in range(4):
        y = dynamics.rk4_step(f, y, 0.25)
    np.testing.assert_allclose(y, [1.0, 1.0], atol=1e-15)


def test_trivial_run_is_constant():
    spec = DomainSpec.type_i(2, 2)
    init = bs_ensemble(spec, 4)
    traj = integrate_ensemble(ModelSpec(spec, 0, 0.0), init, IntegrationConfig(0.01, 0.5, monitor_every=5))
    for snap in traj.snapshots:
        np.testing.assert_allclose(snap.oscillators, init.oscillators, atol=1e-14)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.5)
    assert len(traj.times) == 11


def test_two_oscillators_match_classic():
    theta0 = np.array([0.0, np.pi / 2])
    init = EnsembleState(np.exp(1j * theta0)[:, None, None])
    model = ModelSpec(DomainSpec.type_i(1, 1), 0, 1.0, flows.frequency_drift(0.0))
    cfg = IntegrationConfig(1e-3, 2.0, monitor_every=100, retract_every=0)
    traj = integrate_ensemble(model, init, cfg)
    theta = theta0.copy()
    for k, snap in enumerate(traj.snapshots[1:], 1):
        for _ in range(100):
            theta = dynamics.rk4_step(lambda p: flows.classic_kuramoto_rhs(p, 0.0, 1.0), theta, cfg.step)
        err = np.abs(np.angle(snap.oscillators[:, 0, 0] * np.exp(-1j * theta)))
        assert err.max() <= 1e-8
    gap = lambda z: abs(np.angle(z[1, 0, 0] * np.conj(z[0, 0, 0])))
    assert gap(traj.final.oscillators) < gap(init.oscillators)


@pytest.mark.parametrize("spec", ALL_TYPES, ids=spec_id)
def test_retraction_keeps_boundary(spec, rng):
    model = ModelSpec(spec, 0, 1.0, groups.random_generator(GroupSpec.for_domain(spec), rng, drift_only=True))
    traj = integrate_ensemble(model, bs_ensemble(spec, 4, 1), IntegrationConfig(1e-2, 1.0, monitor_every=10))
    assert traj.max_tangency_drift() <= 1e-9
    for rec in traj.monitors:
        assert rec.ranks == [spec.max_rank] * 4


def test_retract_examples(rng):
    spec = DomainSpec.type_iii(2)
    z = domains.sample_bs_boundary(spec, 0)
    np.testing.assert_allclose(dynamics.retract_batch(spec, z[None])[0], z, atol=1e-14)
    np.testing.assert_allclose(dynamics.retract_batch(spec, 1.01 * z[None])[0], z, atol=1e-14)
    spec = DomainSpec.type_i(3, 2)
    z = domains.sample_bs_boundary(spec, 1)
    noisy = z + 1e-3 * (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)) / np.sqrt(12)
    out = dynamics.retract_state(spec, EnsembleState(noisy)).oscillators[0]
    assert np.linalg.norm(out - noisy) <= 2e-3
    assert domains.on_bs_boundary(spec, out, 1e-12)


@pytest.mark.parametrize("spec", ALL_TYPES, ids=spec_id)
def test_retract_lands_on_boundary(spec, rng):
    z = domains.sample_bs_boundary(spec, 7)
    noise = 1e-3 * (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape))
    out = dynamics.retract_batch(spec, (z + noise)[None])[0]
    assert domains.on_bs_boundary(spec, out, 1e-12)
    assert domains.structure_check(spec, out, 1e-15)


def test_retract_errors():
    spec = DomainSpec.type_i(2, 2)
    with pytest.raises(TooFarToRetract):
        dynamics.retract_batch(spec, 0.5 * np.eye(2)[None])
    with pytest.raises(RankDeficient):
        dynamics.retract_batch(spec, np.diag([1.0, 0.0])[None])


def test_divergence_detected():
    # the exact flow never leaves the domain, so feed the guard a blown-up state
    spec = DomainSpec.type_i(1, 1)
    with pytest.raises(DivergenceDetected) as info:
        dynamics._check_divergence(spec, np.array([[[0.5]], [[20.0]]]), 1.5)
    assert info.value.index == 1 and info.value.time == 1.5


def test_init_outside_rejected():
    spec = DomainSpec.type_i(2, 2)
    with pytest.raises(ValueError):
        integrate_ensemble(ModelSpec(spec), EnsembleState(2 * np.eye(2)), IntegrationConfig())
    with pytest.raises(ShapeMismatch):
        integrate_ensemble(ModelSpec(spec), EnsembleState(np.eye(3)), IntegrationConfig())


def test_rk45_interior_run_matches_rk4(rng):
    spec = DomainSpec.type_i(2, 2)
    model = ModelSpec(spec, 0, 0.7, groups.random_generator(GroupSpec.for_domain(spec), rng, drift_only=True))
    init = EnsembleState(np.stack([domains.sample_interior(spec, k) for k in range(5)]))
    a = integrate_ensemble(model, init, IntegrationConfig(1e-3, 1.0, "rk4", monitor_every=250))
    b = integrate_ensemble(model, init, IntegrationConfig(1e-3, 1.0, "rk45", monitor_every=250))
    np.testing.assert_allclose(b.times, a.times, atol=1e-12)
    np.testing.assert_allclose(b.final.oscillators, a.final.oscillators, atol=1e-8)
    assert np.isnan(a.monitors[-1].max_tangency_drift)


def test_determinism_across_workers(rng):
    spec = DomainSpec.type_i(2, 2)
    model = ModelSpec(spec, 0, 1.0, groups.random_generator(GroupSpec.for_domain(spec), rng, drift_only=True))
    init = bs_ensemble(spec, 30)
    runs = [integrate_ensemble(model, init, IntegrationConfig(1e-2, 0.3, workers=w)) for w in (1, 1, 4)]
    for other in runs[1:]:
        for s, t in zip(runs[0].snapshots, other.snapshots):
            assert np.array_equal(s.oscillators, t.oscillators)


def test_lift_trivial():
    spec = DomainSpec.type_i(2, 2)
    model = ModelSpec(spec, 0, 0.0)
    h_path, traj = integrate_lift(model, bs_ensemble(spec, 3), IntegrationConfig(0.01, 0.2, monitor_every=5))
    for h in h_path:
        np.testing.assert_allclose(h.g, np.eye(4), atol=1e-15)


def test_lift_matches_direct_integration(rng):
    spec = DomainSpec.type_i(2, 2)
    model = ModelSpec(spec, 0, 1.0, groups.random_generator(GroupSpec.for_domain(spec), rng, drift_only=True))
    init = bs_ensemble(spec, 5, 3)
    cfg = IntegrationConfig(1e-3, 0.5, retract_every=0, monitor_every=50)
    direct = integrate_ensemble(model, init, cfg)
    h_path, lifted = integrate_lift(model, init, cfg)
    for s, t in zip(direct.snapshots, lifted.snapshots):
        np.testing.assert_allclose(t.oscillators, s.oscillators, atol=1e-9)
    assert all(groups.is_group_member(model.group, h, 1e-8) for h in h_path)


def test_lift_scalar_component_equations(rng):
    # SU(1,1): A' = a A + Z conj(B), B' = a B + Z conj(A) along the run
    model = ModelSpec(DomainSpec.type_i(1, 1), 0, 1.0, flows.frequency_drift(0.6))
    init = EnsembleState(np.exp(1j * rng.uniform(0, 2 * np.pi, 6))[:, None, None])
    h_path, traj = integrate_lift(model, init, IntegrationConfig(1e-3, 0.2, monitor_every=1))
    a = model.drift.a[0, 0]
    k = 100
    dt = traj.times[k + 1] - traj.times[k]
    A = lambda j: h_path[j].g[0, 0]
    B = lambda j: h_path[j].g[0, 1]
    Z = np.mean(traj.snapshots[k].oscillators[:, 0, 0])
    dA = (A(k + 1) - A(k - 1)) / (2 * dt)
    dB = (B(k + 1) - B(k - 1)) / (2 * dt)
    assert dA == pytest.approx(a * A(k) + Z * np.conj(B(k)), abs=1e-6)
    assert dB == pytest.approx(a * B(k) + Z * np.conj(A(k)), abs=1e-6)


def test_tangency_drift_without_retraction_small():
    spec = DomainSpec.type_i(3, 2)
    model = ModelSpec(spec, 0, 1.0)
    traj = integrate_ensemble(model, bs_ensemble(spec, 6), IntegrationConfig(1e-2, 1.0, retract_every=0))
    assert traj.max_tangency_drift() <= 1e-6


@pytest.mark.parametrize("spec", [DomainSpec.type_i(1, 1), DomainSpec.type_i(3, 1), DomainSpec.type_ii(2)], ids=spec_id)
def test_closed_form_retraction_matches_polar(spec, rng):
    from bsd_kuramoto.cxmat import polar_unitary_factor

    zs = np.stack([domains.sample_bs_boundary(spec, k) for k in range(4)])
    noise = 1e-3 * (rng.standard_normal(zs.shape) + 1j * rng.standard_normal(zs.shape))
    if spec.kind is domains.DomainKind.TYPE_II:
        noise = noise - np.swapaxes(noise, -1, -2)
    np.testing.assert_allclose(dynamics.retract_batch(spec, zs + noise), polar_unitary_factor(zs + noise), atol=1e-14)
