import itertools
import math

import numpy as np
import pytest

from conftest import ExactCircleSolver, ExactTorusSolver, circle_oracle, torus_oracle
from varsample.exceptions import InputError, SamplerAborted
from varsample.checkpoint import load_checkpoint
from varsample.model import HeuristicsConfig, MinDistanceResult, SamplerConfig
from varsample.parser import load_example
from varsample.sampler import (Sampler, read_sample_csv, resume, sample, subsample, verify_sample,
                               write_sample_csv)
from varsample.tda import compute_persistence, infer_betti, inference_corner, rips_filtration

CIRCLE_BOX = dict(lo=[-1.5, -1.45], hi=[1.6, 1.65])


def circle_config(**kwargs):
    options = dict(epsilon=0.3, delta=0.0, **CIRCLE_BOX)
    options.update(kwargs)
    return SamplerConfig(**options)


# ============ Configuration ============

def test_config_rejects_delta_above_epsilon():
    """delta above epsilon is refused"""
    with pytest.raises(ValueError):
        SamplerConfig(epsilon=0.1, delta=0.2, lo=[0], hi=[1])


def test_config_rejects_rho_not_below_epsilon():
    """rho must stay below epsilon"""
    with pytest.raises(ValueError):
        SamplerConfig(epsilon=0.1, delta=0.0, lo=[0], hi=[1],
                      heuristics=HeuristicsConfig(dynamic_sample=True, rho=0.1))


def test_region_dimension_must_match_system(circle_solver):
    """Region and system dimensions must agree"""
    cfg = SamplerConfig(epsilon=0.3, delta=0.0, lo=[0, 0, 0], hi=[1, 1, 1])
    with pytest.raises(InputError):
        Sampler(load_example("circle"), cfg, solver=circle_solver)


def test_overdetermined_system_is_randomized(circle_solver):
    """Extra equations are randomized down to N - d"""
    cfg = SamplerConfig(epsilon=0.5, delta=0.0, lo=[-1] * 4, hi=[1] * 4, seed=3)
    sampler = Sampler(load_example("twisted_cubic_cone"), cfg, solver=circle_solver)
    assert sampler.system.num_polys == 2


# ============ Sampling with an exact oracle solver ============

def test_circle_sample_is_dense(circle_solver):
    """Exact circle solver yields a verified sample"""
    cloud = sample(load_example("circle"), circle_config(), solver=circle_solver)
    assert len(cloud) > 0
    np.testing.assert_allclose(np.linalg.norm(cloud.array, axis=1), 1.0, atol=1e-12)
    report = verify_sample(cloud, load_example("circle"), circle_oracle())
    assert report.passed, report.reason
    assert report.coverage_gap <= 0.3
    assert cloud.certificate.min_distance_calls == circle_solver.calls
    assert cloud.certificate.describe() == "(0,0.29999999999999999)"


def test_empty_variety_terminates_after_one_call():
    """Empty variety is excluded by a single call"""
    solver = ExactCircleSolver(empty=True)
    cloud = sample(load_example("empty_circle"), circle_config(), solver=solver)
    assert len(cloud) == 0
    assert solver.calls == 1
    assert cloud.certificate.exclusion_balls == 1


@pytest.mark.parametrize("heuristics", [
    HeuristicsConfig(dynamic_split=True),
    HeuristicsConfig(dynamic_sample=True, rho=0.1),
    HeuristicsConfig(priority_search=True),
    HeuristicsConfig(dynamic_split=True, dynamic_sample=True, rho=0.1, priority_search=True),
], ids=lambda h: h.label)
def test_heuristics_keep_the_sample_valid(heuristics):
    """Heuristics still give a valid sample"""
    cfg = circle_config(heuristics=heuristics)
    cloud = sample(load_example("circle"), cfg, solver=ExactCircleSolver())
    assert cloud.certificate.epsilon == pytest.approx(cfg.effective_epsilon)
    assert verify_sample(cloud, load_example("circle"), circle_oracle()).passed


def test_dynamic_sample_thins_points():
    """Dynamic sampling keeps points rho apart"""
    plain = sample(load_example("circle"), circle_config(), solver=ExactCircleSolver())
    thinned = sample(load_example("circle"), circle_config(heuristics=HeuristicsConfig(dynamic_sample=True, rho=0.2)),
                     solver=ExactCircleSolver())
    assert len(thinned) < len(plain)
    gaps = np.linalg.norm(thinned.array[:, None] - thinned.array[None, :], axis=2)
    assert np.min(gaps + np.eye(len(thinned)) * 10) > 0.2


def test_sampling_is_deterministic(circle_solver):
    """Same seed gives the same points"""
    first = sample(load_example("circle"), circle_config(seed=5), solver=circle_solver)
    second = sample(load_example("circle"), circle_config(seed=5), solver=ExactCircleSolver())
    assert first.points == second.points


def test_parallel_workers_are_deterministic_and_valid():
    """Worker pool output is reproducible and valid"""
    first = sample(load_example("circle"), circle_config(workers=3), solver=ExactCircleSolver())
    second = sample(load_example("circle"), circle_config(workers=3), solver=ExactCircleSolver())
    assert first.points == second.points
    assert verify_sample(first, load_example("circle"), circle_oracle()).passed


def test_lying_solver_trips_leaf_containment():
    """Wrong MinDistance answers trip the leaf check"""
    class LyingSolver(ExactCircleSolver):
        def min_distance(self, y, seed=None):
            self.calls += 1
            return MinDistanceResult(witnesses=[[5.0, 5.0]], min_distance=0.0, residuals=[0.0])

    cfg = SamplerConfig(epsilon=0.5, delta=0.0, lo=[-1, -1], hi=[1, 1])
    with pytest.raises(AssertionError):
        sample(load_example("circle"), cfg, solver=LyingSolver())


def test_torus_sample_is_dense():
    """Exact torus solver yields a verified sample"""
    cfg = SamplerConfig(epsilon=0.35, delta=0.0, lo=[-1] * 4, hi=[1] * 4)
    cloud = sample(load_example("torus"), cfg, solver=ExactTorusSolver())
    report = verify_sample(cloud, load_example("torus"), torus_oracle(60))
    assert report.passed, report.reason


# ============ Checkpoint / resume ============

def test_abort_writes_checkpoint_and_resume_matches(tmp_path):
    """Aborted run resumes to the same sample"""
    full = sample(load_example("circle"), circle_config(), solver=ExactCircleSolver())

    path = tmp_path / "ckpt.json"
    cfg = circle_config(checkpoint_path=str(path), checkpoint_every=5)
    with pytest.raises(SamplerAborted) as exc:
        sample(load_example("circle"), cfg, solver=ExactCircleSolver(fail_after=12))
    assert exc.value.checkpoint == str(path)
    state = load_checkpoint(path)
    assert state.calls == 12
    assert state.queue

    resumed = Sampler.from_checkpoint(state, solver=ExactCircleSolver()).run()
    assert resumed.points == full.points
    assert resumed.certificate.min_distance_calls == full.certificate.min_distance_calls


def test_resume_without_solver_uses_stored_backend(tmp_path, monkeypatch):
    """Resume rebuilds the solver from the checkpoint backend"""
    path = tmp_path / "ckpt.json"
    cfg = circle_config(checkpoint_path=str(path))
    with pytest.raises(SamplerAborted):
        sample(load_example("circle"), cfg, solver=ExactCircleSolver(fail_after=3))
    seen = {}

    def fake_from_checkpoint(state, system=None, solver=None):
        seen["backend"] = state.backend
        return Sampler(load_example("circle"), state.config, solver=ExactCircleSolver())

    monkeypatch.setattr(Sampler, "from_checkpoint", staticmethod(fake_from_checkpoint))
    cloud = resume(path)
    assert seen["backend"] == "internal"
    assert len(cloud) > 0


# ============ Subsampling / verification / files ============

def test_subsample_thins_and_weakens_certificate(circle_solver):
    """Thinning at r adds r to epsilon"""
    cloud = sample(load_example("circle"), circle_config(epsilon=0.1), solver=circle_solver)
    thinned = subsample(cloud, 0.3, seed=1)
    assert len(thinned) < len(cloud)
    assert thinned.certificate.epsilon == pytest.approx(0.4)
    kept = thinned.array
    gaps = np.linalg.norm(kept[:, None] - kept[None, :], axis=2) + np.eye(len(kept)) * 10
    assert np.min(gaps) > 0.3
    # every dropped point is within r of a kept one
    dist = np.linalg.norm(cloud.array[:, None] - kept[None, :], axis=2)
    assert np.max(np.min(dist, axis=1)) <= 0.3
    assert verify_sample(thinned, load_example("circle"), circle_oracle()).passed


def test_subsample_rejects_bad_radius(circle_solver):
    """Radius must be positive"""
    cloud = sample(load_example("circle"), circle_config(), solver=circle_solver)
    with pytest.raises(InputError):
        subsample(cloud, 0.0)


def test_verify_detects_coverage_gap(circle_solver):
    """Missing half the circle fails coverage"""
    cloud = sample(load_example("circle"), circle_config(), solver=circle_solver)
    sparse = cloud.model_copy(update={"points": [p for p in cloud.points if p[0] > 0]})
    report = verify_sample(sparse, load_example("circle"), circle_oracle())
    assert not report.passed
    assert report.coverage_gap > 0.3
    assert report.witness is not None


def test_verify_detects_point_off_variety(circle_solver):
    """A point off the circle fails the delta check"""
    cloud = sample(load_example("circle"), circle_config(), solver=circle_solver)
    bad = cloud.model_copy(update={"points": cloud.points + [[0.0, 0.5]]})
    report = verify_sample(bad, load_example("circle"), circle_oracle())
    assert not report.passed
    assert report.witness == [0.0, 0.5]


def test_verify_empty_cloud_against_points(circle_solver):
    """Empty cloud fails against points, passes against none"""
    cloud = sample(load_example("empty_circle"), circle_config(), solver=ExactCircleSolver(empty=True))
    assert not verify_sample(cloud, load_example("circle"), circle_oracle(100)).passed
    assert verify_sample(cloud, load_example("empty_circle"), np.empty((0, 2))).passed


def test_sample_csv_keeps_full_precision(tmp_path, circle_solver):
    """CSV header and points round trip exactly"""
    cloud = sample(load_example("circle"), circle_config(seed=9), solver=circle_solver)
    path = write_sample_csv(cloud, tmp_path / "sample.csv")
    header = path.read_text().splitlines()[:6]
    assert header[0] == "# vars: x1 x2"
    assert header[3] == "# certificate: (0,0.29999999999999999)"
    loaded = read_sample_csv(path)
    assert loaded.points == cloud.points
    assert loaded.seed == 9
    assert loaded.certificate.epsilon == 0.3


def test_read_sample_csv_needs_vars_header(tmp_path):
    """CSV without a vars header is refused"""
    path = tmp_path / "bare.csv"
    path.write_text("0.1,0.2\n")
    with pytest.raises(InputError):
        read_sample_csv(path)


# ============ Coverage certificate ============

def assert_leaves_cover_region(sampler, count=100_000, seed=0):
    """Every leaf is done, the leaves tile R, and random points of R fall in stored balls."""
    root = sampler.tree.root_box
    leaves = sampler.tree.leaves()
    assert all(n.done for n in leaves)
    assert sum(n.box.volume for n in leaves) == pytest.approx(root.volume, rel=1e-9)

    balls = sampler.regions.balls
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    lo = np.array([n.box.lo for n in leaves])
    hi = np.array([n.box.hi for n in leaves])
    points = np.random.default_rng(seed).uniform(root.lo, root.hi, size=(count, root.dim))
    for chunk in np.array_split(points, max(1, count // 1000)):
        dist = np.linalg.norm(chunk[:, None, :] - centers[None], axis=2)
        assert np.all(np.any(dist <= radii + 1e-12, axis=1))
        in_leaf = np.all((chunk[:, None, :] >= lo[None]) & (chunk[:, None, :] <= hi[None]), axis=2)
        assert np.all(in_leaf.any(axis=1))


def test_leaves_cover_region_with_exact_solver():
    """Leaves tile R and sit inside stored balls"""
    cfg = SamplerConfig(epsilon=0.2, delta=0.0, lo=[-2, -2], hi=[2, 2])
    sampler = Sampler(load_example("circle"), cfg, solver=ExactCircleSolver())
    sampler.run()
    assert_leaves_cover_region(sampler)


def test_leaves_cover_region_for_empty_variety():
    """One exclusion ball covers R when the variety is empty"""
    sampler = Sampler(load_example("empty_circle"), circle_config(), solver=ExactCircleSolver(empty=True))
    sampler.run()
    assert_leaves_cover_region(sampler, count=10_000)


# ============ Real solver, end to end ============

def test_circle_acceptance_with_internal_solver():
    """Circle in [-2,2]^2 at (1e-6, 0.2): verified sample, tiled region, beta0 and beta1 recovered."""
    cfg = SamplerConfig(epsilon=0.2, delta=1e-6, lo=[-2, -2], hi=[2, 2])
    sampler = Sampler(load_example("circle"), cfg)
    cloud = sampler.run()
    report = verify_sample(cloud, load_example("circle"), circle_oracle())
    assert report.passed, report.reason
    assert np.max(np.abs(np.sum(cloud.array ** 2, axis=1) - 1)) <= 2.1 * 1e-6
    assert math.isfinite(report.coverage_gap)
    assert_leaves_cover_region(sampler)

    a, b = inference_corner(2, cfg.epsilon, cfg.delta)
    diag = compute_persistence(rips_filtration(cloud.array, b, p_max=1))
    verdict = infer_betti(diag, 2, cfg.epsilon, cfg.delta)
    assert verdict.betti_lower_bound(0) >= 1
    assert verdict.betti_lower_bound(1) >= 1


ALL_HEURISTICS = [HeuristicsConfig(dynamic_split=split, dynamic_sample=dyn, rho=0.05 if dyn else 0.0,
                                   priority_search=prio)
                  for split, dyn, prio in itertools.product([False, True], repeat=3)]


@pytest.mark.slow
@pytest.mark.parametrize("heuristics", ALL_HEURISTICS, ids=lambda h: h.label)
def test_heuristics_with_internal_solver(heuristics):
    """Each heuristic combination still yields a (delta, epsilon + rho)-sample of the circle."""
    cfg = SamplerConfig(epsilon=0.2, delta=1e-6, lo=[-2, -2], hi=[2, 2], heuristics=heuristics)
    sampler = Sampler(load_example("circle"), cfg)
    cloud = sampler.run()
    expected = 0.25 if heuristics.dynamic_sample else 0.2
    assert cloud.certificate.epsilon == pytest.approx(expected)
    report = verify_sample(cloud, load_example("circle"), circle_oracle())
    assert report.passed, report.reason
    assert_leaves_cover_region(sampler, count=20_000)
