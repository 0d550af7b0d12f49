"""
Per-user exploration weights, alone and inside a condition run.
"""

from dataclasses import replace

import numpy as np
import pytest
from conftest import make_corpus, tiny_config

from kycrec.core import Interaction, InteractionKind, RankedEntry, RankedList
from kycrec.pipeline import Condition, ExplorationConfig, ExplorationState, ExposureStats
from kycrec.sim import ScenarioConfigError, run_condition


def _ranked(user_id, bonuses):
    entries = tuple(
        RankedEntry.from_parts(f"i{j:05d}", 1.0 - 0.1 * j, 0.0, bonus)
        for j, bonus in enumerate(bonuses)
    )
    return RankedList(user_id, entries, max(1, len(entries)), reranked=True)


def test_config_bounds():
    with pytest.raises(ValueError):
        ExplorationConfig(decay=0.0)
    with pytest.raises(ValueError):
        ExplorationConfig(decay=1.2)
    with pytest.raises(ValueError):
        ExplorationConfig(recovery=0.9)
    with pytest.raises(ValueError):
        ExplorationState(-0.1)


def test_scenario_rejects_bad_exploration():
    with pytest.raises(ScenarioConfigError):
        tiny_config(exploration={"decay": 1.5})
    with pytest.raises(ScenarioConfigError):
        tiny_config(exploration={"recovery": 0.5})
    with pytest.raises(ScenarioConfigError):
        tiny_config(exploration={"rate": 0.5})
    cfg = tiny_config(exploration={"adaptive": False})
    assert cfg.pipeline.exploration == ExplorationConfig(adaptive=False)


def test_fresh_users_get_the_base_weight():
    state = ExplorationState(0.15)
    assert state.weight("u00000") == 0.15
    assert state.weights == {}


def test_ignored_exploration_decays():
    state = ExplorationState(0.2, ExplorationConfig(decay=0.5, recovery=2.0))
    weight = state.observe(_ranked("u00001", [0.2, 0.0, 0.2, 0.2]), [False, True, False, False])
    assert weight == pytest.approx(0.2 * 0.5**3)
    assert state.weight("u00001") == pytest.approx(0.025)
    # clicks on unexplored entries change nothing
    assert state.observe(_ranked("u00001", [0.0, 0.0]), [True, True]) == pytest.approx(0.025)


def test_taken_exploration_recovers_up_to_base():
    state = ExplorationState(0.2, ExplorationConfig(decay=0.5, recovery=2.0))
    state.update("u00002", ignored=2, taken=0)
    assert state.weight("u00002") == pytest.approx(0.05)
    state.observe(_ranked("u00002", [0.05]), [True])
    assert state.weight("u00002") == pytest.approx(0.1)
    state.observe(_ranked("u00002", [0.1, 0.1, 0.1]), [True, True, True])
    assert state.weight("u00002") == 0.2


def test_mixed_list_applies_both_factors():
    state = ExplorationState(0.3, ExplorationConfig(decay=0.6, recovery=1.5))
    state.observe(_ranked("u00003", [0.3, 0.3, 0.3]), [True, False, False])
    assert state.weight("u00003") == pytest.approx(0.3 * 0.6**2 * 1.5)


def test_static_weight_when_not_adaptive():
    state = ExplorationState(0.15, ExplorationConfig(adaptive=False))
    state.observe(_ranked("u00004", [0.15] * 5), [False] * 5)
    assert state.weight("u00004") == 0.15
    assert state.weights == {}


def test_click_flags_must_match_entries():
    state = ExplorationState(0.15)
    with pytest.raises(ValueError):
        state.observe(_ranked("u00005", [0.15, 0.0]), [True])


def test_warm_start_from_log():
    corpus = make_corpus(np.random.default_rng(0), 12)
    ids = list(corpus.ids)
    exposure = ExposureStats({ids[0]: 5}, threshold=2.0, quality_floor=0.0)
    log = [
        Interaction("u1", ids[1], InteractionKind.IMPRESSION, 1, 0),
        Interaction("u1", ids[1], InteractionKind.CLICK, 1, 0),
        Interaction("u1", ids[2], InteractionKind.IMPRESSION, 2, 0),
        Interaction("u1", ids[2], InteractionKind.IMPRESSION, 1, 1),
        # well exposed: not an explored impression
        Interaction("u2", ids[0], InteractionKind.IMPRESSION, 1, 0),
        Interaction("u3", "missing", InteractionKind.IMPRESSION, 1, 0),
    ]
    cfg = ExplorationConfig(decay=0.5, recovery=1.5)
    state = ExplorationState.from_log(log, exposure, corpus, 0.2, cfg)
    assert state.weight("u1") == pytest.approx(0.2 * 0.5 * 1.5)
    assert state.weight("u2") == 0.2
    assert state.weight("u3") == 0.2
    assert list(state.weights) == ["u1"]

    assert ExplorationState.from_log(log, exposure, corpus, 0.0, cfg).weights == {}


def test_run_follows_the_weight_update(tiny_world):
    cfg = tiny_world.config
    assert cfg.clicks.model == "deterministic"
    recommender = tiny_world.observed.recommender(cfg)
    condition = Condition.ADVANCED_KYC
    explore = cfg.pipeline.exploration
    run = run_condition(tiny_world, condition, recommender=recommender)

    start = ExplorationState.from_log(
        tiny_world.observed.history,
        recommender.exposure,
        tiny_world.observed.corpus,
        cfg.ranking.w_explore,
        explore,
    )
    expected = {}
    for slate in run.slates:
        uid = slate.user_id
        weight = expected.get(uid, start.weight(uid))
        bonuses = [e.exploration_bonus for e in slate.ranked.entries if e.exploration_bonus > 0]
        assert bonuses == pytest.approx([weight] * len(bonuses))
        grades = tiny_world.grades(uid, slate.ranked.item_ids)
        ignored = taken = 0
        for entry, grade in zip(slate.ranked.entries, grades):
            if entry.exploration_bonus > 0:
                if grade >= cfg.clicks.threshold:
                    taken += 1
                else:
                    ignored += 1
        if ignored or taken:
            weight = min(cfg.ranking.w_explore, weight * explore.decay**ignored * explore.recovery**taken)
        expected[uid] = weight

    assert run.explore_weights == pytest.approx(expected)
    assert all(w <= cfg.ranking.w_explore for w in run.explore_weights.values())
    assert 0.0 <= run.mean_explore_weight() <= cfg.ranking.w_explore


def test_static_run_uses_the_configured_weight(tiny_world):
    world = replace(tiny_world, config=tiny_config(exploration={"adaptive": False}))
    run = run_condition(world, Condition.ADVANCED_KYC_CIRCLES)
    w_explore = world.config.ranking.w_explore
    bonuses = {e.exploration_bonus for s in run.slates for e in s.ranked.entries}
    assert bonuses <= {0.0, w_explore}
    assert set(run.explore_weights.values()) == {w_explore}


def test_baseline_run_never_explores(tiny_world):
    run = run_condition(tiny_world, Condition.BASELINE)
    assert run.exploration_share() == 0.0
    assert set(run.explore_weights.values()) == {0.0}
