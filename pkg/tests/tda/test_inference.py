import math

import numpy as np
import pytest

from conftest import ExactCircleSolver, torus_oracle
from varsample.exceptions import InputError
from varsample.model import SamplerConfig
from varsample.parser import load_example
from varsample.sampler import sample, subsample, verify_sample
from varsample.tda import PersistenceDiagram, compute_persistence, infer_betti, inference_corner, rips_filtration
from varsample.tda.persistence import Interval


# ============ Corner ============

def test_corner_for_torus_in_r4():
    """Corner for n=4, eps=0.14, delta=1e-7"""
    a, b = inference_corner(4, 0.14, 1e-7)
    assert a == pytest.approx(0.221, abs=5e-4)
    assert b == pytest.approx(0.56, abs=1e-6)


def test_corner_for_plane_curve():
    """Corner for n=2"""
    a, b = inference_corner(2, 0.3, 0.0)
    assert a == pytest.approx(0.6 * math.sqrt(0.75))
    assert b == pytest.approx(1.2)


@pytest.mark.parametrize("n, epsilon, delta", [(0, 0.1, 0.0), (2, 0.1, 0.2), (2, 0.1, -1e-3), (2.0, 0.1, 0.0)])
def test_corner_rejects_bad_input(n, epsilon, delta):
    """Invalid n, epsilon or delta are refused"""
    with pytest.raises(InputError):
        inference_corner(n, epsilon, delta)


# ============ Counting ============

def synthetic_diagram(threshold=2.0):
    return PersistenceDiagram(intervals=[
        Interval(0.0, math.inf, 0),
        Interval(0.0, 0.1, 0),
        Interval(0.2, 1.5, 1),
        Interval(0.2, 0.9, 1),
        Interval(0.8, 1.9, 1),
        Interval(0.3, math.inf, 1),
    ], max_dim=1, threshold=threshold)


def test_counts_points_in_the_upper_left_quadrant():
    """Only points above-left of the corner are counted"""
    verdict = infer_betti(synthetic_diagram(), 2, 0.3, 0.0)
    assert verdict.counts == {0: 1, 1: 2}
    assert not verdict.censored
    assert verdict.warnings == []
    assert "feature size" in verdict.assumption


def test_censored_diagram_warns_and_skips_essential_classes():
    """Low threshold flags the verdict as censored"""
    verdict = infer_betti(synthetic_diagram(threshold=1.0), 2, 0.3, 0.0)
    assert verdict.censored
    assert len(verdict.warnings) == 1
    assert verdict.counts == {0: 0, 1: 1}


def test_empty_diagram_gives_zero_counts():
    """Empty diagram gives zero in every dimension"""
    verdict = infer_betti(PersistenceDiagram(max_dim=2, threshold=1.0), 3, 0.1, 0.0)
    assert verdict.counts == {0: 0, 1: 0, 2: 0}


# ============ Pipelines ============

def test_circle_pipeline_finds_component_and_loop():
    """Circle sample, thinned, recovers beta0 and beta1"""
    cfg = SamplerConfig(epsilon=0.2, delta=0.0, lo=[-2, -2], hi=[2, 2])
    cloud = sample(load_example("circle"), cfg, solver=ExactCircleSolver())
    thinned = subsample(cloud, 0.15, seed=1)
    cert = thinned.certificate
    assert cert.epsilon == pytest.approx(0.35)

    a, b = inference_corner(2, cert.epsilon, cert.delta)
    diag = compute_persistence(rips_filtration(thinned.array, b, p_max=1))
    verdict = infer_betti(diag, 2, cert.epsilon, cert.delta)
    assert verdict.betti_lower_bound(0) >= 1
    assert verdict.betti_lower_bound(1) >= 1


@pytest.mark.slow
def test_torus_betti_numbers():
    """Clifford torus at coarse scale with the in-repo solver: beta0 >= 1 and beta1 >= 2."""
    system = load_example("torus")
    cfg = SamplerConfig(epsilon=0.25, delta=1e-6, lo=[-1] * 4, hi=[1] * 4)
    cloud = sample(system, cfg)
    report = verify_sample(cloud, system, torus_oracle(60))
    assert report.passed, report.witness

    a, b = inference_corner(4, 0.25, 1e-6)
    diag = compute_persistence(rips_filtration(cloud.array, b, p_max=2, simplex_cap=50_000_000))
    verdict = infer_betti(diag, 4, 0.25, 1e-6)
    assert verdict.betti_lower_bound(0) >= 1
    assert verdict.betti_lower_bound(1) >= 2


@pytest.mark.extended
def test_pentagon_sample_and_subsample():
    """Pentagon linkage sample thinned at 0.12"""
    system = load_example("pentagon")
    cfg = SamplerConfig(epsilon=1.0, delta=1e-7, lo=[-1] * 6, hi=[1] * 6)
    cloud = sample(system, cfg)
    assert len(cloud) > 0
    residuals = np.abs(np.array([system.evaluate(p) for p in cloud.array]))
    assert residuals.max() < 1e-6
    thinned = subsample(cloud, 0.12, seed=0)
    assert thinned.certificate.epsilon == pytest.approx(1.12)
    assert thinned.certificate.delta == pytest.approx(1e-7)
