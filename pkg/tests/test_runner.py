from dataclasses import replace

import numpy as np
import pytest
from conftest import tiny_config

from kycrec.core import Category, InteractionKind
from kycrec.metrics import ctr_at_k
from kycrec.pipeline import Condition
from kycrec.sim import GroundTruth, generate_world, run_condition, run_experiment
from kycrec.sim.runner import BernoulliClicks, DeterministicClicks


def _clicks(run):
    return [(e.user_id, e.item_id) for e in run.interactions if e.kind is InteractionKind.CLICK]


def test_click_models():
    grades = np.array([0, 1, 2, 3])
    assert DeterministicClicks(2).clicks(grades).tolist() == [False, False, True, True]
    always = BernoulliClicks({0: 0.0, 1: 0.0, 2: 1.0, 3: 1.0}, np.random.default_rng(0))
    assert always.clicks(grades).tolist() == [False, False, True, True]


def test_deterministic_run(tiny_world):
    run = run_condition(tiny_world, Condition.ADVANCED_KYC)
    cfg = tiny_world.config
    assert len(run.slates) == cfg.world.users * 5
    assert [s.user_id for s in run.slates] == sorted(s.user_id for s in run.slates)

    clicked = set(_clicks(run))
    for slate in run.slates:
        grades = tiny_world.grades(slate.user_id, slate.ranked.item_ids)
        for item_id, grade in zip(slate.ranked.item_ids, grades):
            assert ((slate.user_id, item_id) in clicked) == (grade >= cfg.clicks.threshold)

    impressions = [e for e in run.interactions if e.kind is InteractionKind.IMPRESSION]
    assert len(impressions) == sum(len(s.ranked) for s in run.slates)
    assert all(e.tick == tiny_world.observed.tick for e in run.interactions)


def test_bernoulli_is_reproducible():
    world = generate_world(tiny_config(clicks={"model": "bernoulli"}))
    first = run_condition(world, Condition.BASIC_KYC)
    second = run_condition(world, Condition.BASIC_KYC)
    assert first.interactions == second.interactions


def test_parallel_equals_serial(tiny_world):
    conditions = [Condition.BASELINE, Condition.NO_KYC, Condition.ADVANCED_KYC_CIRCLES]
    serial = run_experiment(tiny_world, conditions, workers=1)
    parallel = run_experiment(tiny_world, conditions, workers=3)
    assert list(parallel) == conditions
    for condition in conditions:
        assert parallel[condition] == serial[condition]


def test_hidden_truth_never_reaches_the_pipeline(tiny_world):
    rng = np.random.default_rng(99)
    truth = tiny_world.truth
    scrambled = GroundTruth(
        latents={u: tuple(rng.standard_normal(len(v))) for u, v in truth.latents.items()},
        mainstream=truth.mainstream,
        thresholds=truth.thresholds,
    )
    # with a fixed exploration weight no simulated click feeds back into ranking
    static = replace(tiny_world, config=tiny_config(exploration={"adaptive": False}))
    perturbed = replace(static, truth=scrambled)
    for condition in Condition:
        original = run_condition(static, condition)
        moved = run_condition(perturbed, condition)
        assert original.ranked_lists == moved.ranked_lists

    # adaptive weights only see clicks, so each user's first list is unchanged
    for condition in Condition:
        original = run_condition(tiny_world, condition)
        moved = run_condition(replace(tiny_world, truth=scrambled), condition)
        firsts = slice(None, None, len(Category))
        assert original.ranked_lists[firsts] == moved.ranked_lists[firsts]


def test_ctr_is_nested_in_k(tiny_world):
    runs = run_experiment(tiny_world)
    for run in runs.values():
        rates = [ctr_at_k(run.interactions, run.ranked_lists, k) for k in (1, 3, 5)]
        assert rates == sorted(rates)
        assert all(0.0 <= r <= 1.0 for r in rates)


def test_unknown_condition_label(tiny_world):
    with pytest.raises(ValueError):
        run_condition(tiny_world, "Oracle")
