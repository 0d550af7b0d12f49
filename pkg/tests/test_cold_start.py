import logging
import math
import unittest

import numpy as np
import pytest
from conftest import axis_space, make_corpus

from kycrec.core import Category, ContentItem, Corpus, Demographics, KycTier, UserProfile
from kycrec.pipeline import DemographicPrior, allocate, cold_start_recall, largest_remainder
from kycrec.pipeline.cold_start import (
    age_band,
    bucket_key,
    demographic_prior_vector,
    occupation_topics,
)


def _profile(tier=KycTier.BASIC_KYC, age=30, occupation="student"):
    demo = None if tier == KycTier.NO_KYC else Demographics(age, occupation, "west", 30000.0, "female")
    tags = frozenset() if tier == KycTier.NO_KYC else frozenset({"topic_00"})
    return UserProfile("u0001", tier, demographics=demo, declared_tags=tags)


def test_age_bands():
    assert age_band(18) == "18-24"
    assert age_band(35) == "35-44"
    assert age_band(60) == "45-60"
    with pytest.raises(ValueError):
        age_band(61)
    assert bucket_key(Demographics(25, "clerk", "north", 1.0, "male")) == "25-34|clerk"


def test_occupation_topics_partition_labels():
    labels = [f"topic_{i:02d}" for i in range(10)]
    occupations = ["a", "b", "c"]
    covered = [t for o in occupations for t in occupation_topics(labels, occupations, o)]
    assert sorted(covered) == labels
    assert occupation_topics(labels, occupations, "nobody") == []


def test_largest_remainder():
    assert largest_remainder({"a": 0.5, "b": 0.3, "c": 0.2}, 10) == {"a": 5, "b": 3, "c": 2}
    # quotas 1.5 / 1.5: the tie goes to the earlier label
    assert largest_remainder({"b": 1.0, "a": 1.0}, 3) == {"a": 2, "b": 1}
    assert sum(largest_remainder({"x": 0.7, "y": 0.2, "z": 0.1}, 7).values()) == 7
    assert largest_remainder({"a": 0.0, "b": 1.0}, 4) == {"b": 4}


def test_allocate_redistributes_shortfall():
    seats = allocate({"a": 0.6, "b": 0.3, "c": 0.1}, {"a": 2, "b": 10, "c": 10}, 10)
    assert seats["a"] == 2
    assert sum(seats.values()) == 10
    assert seats["b"] > seats["c"]
    assert sum(allocate({"a": 1.0}, {"a": 3}, 10).values()) == 3


class TestDemographicPrior(unittest.TestCase):
    def setUp(self):
        self.labels = [f"topic_{i:02d}" for i in range(16)]
        self.prior = DemographicPrior.default(self.labels)

    def test_buckets_sum_to_one(self):
        for weights in self.prior.buckets.values():
            self.assertAlmostEqual(sum(weights.values()), 1.0, places=9)
            self.assertTrue(all(w >= 0 for w in weights.values()))

    def test_unknown_bucket_is_uniform(self):
        demo = Demographics(40, "astronaut", "north", 1.0, "male")
        with self.assertLogs("kycrec.pipeline.cold_start", level=logging.WARNING):
            dist = self.prior.distribution(demo)
        self.assertEqual(set(dist), {c.value for c in Category})
        self.assertAlmostEqual(sum(dist.values()), 1.0)

    def test_rejects_bad_tables(self):
        self.assertRaises(ValueError, DemographicPrior, {"18-24|x": {"Ad": 0.5}})
        self.assertRaises(ValueError, DemographicPrior, {"18-24|x": {"Ad": 1.5, "News": -0.5}})


@pytest.fixture(scope="function", name="corpus")
def _corpus():
    yield make_corpus(np.random.default_rng(5), 300)


@pytest.fixture(scope="function", name="prior")
def _prior():
    yield DemographicPrior.default([f"topic_{i:02d}" for i in range(3)])


def test_no_kyc_is_balanced(corpus, prior):
    picked = cold_start_recall(_profile(KycTier.NO_KYC), prior, corpus, 10)
    counts = {c: sum(corpus[i].category == c for i in picked) for c in Category}
    assert len(picked) == 10
    assert set(counts.values()) == {2}


@pytest.mark.parametrize("k", [1, 3, 5, 7, 10, 12, 25])
def test_no_kyc_spreads_over_categories(corpus, prior, k):
    picked = cold_start_recall(_profile(KycTier.NO_KYC), prior, corpus, k)
    counts = [sum(corpus[i].category == c for i in picked) for c in Category]
    assert len(picked) == len(set(picked)) == k
    assert max(counts) == math.ceil(k / 5)
    assert min(counts) == k // 5


def test_no_kyc_in_category_is_popularity(corpus, prior):
    picked = cold_start_recall(_profile(KycTier.NO_KYC), prior, corpus, 5, Category.GOSSIP)
    expected = sorted(
        (i for i in corpus if i.category == Category.GOSSIP), key=lambda i: (-i.popularity, i.item_id)
    )
    assert picked == [i.item_id for i in expected[:5]]


def test_demographics_steer_categories(corpus, prior):
    young = cold_start_recall(_profile(age=20), prior, corpus, 20)
    old = cold_start_recall(_profile(age=55), prior, corpus, 20)
    assert len(young) == len(old) == 20
    social = {Category.GOSSIP, Category.SHARING}
    assert sum(corpus[i].category in social for i in young) > sum(
        corpus[i].category in social for i in old
    )
    assert sum(corpus[i].category == Category.NEWS for i in old) > sum(
        corpus[i].category == Category.NEWS for i in young
    )


def test_in_category_allocation_over_topics(corpus, prior):
    # a student's mass goes to topic_00 inside the category, then popularity tops up
    picked = cold_start_recall(_profile(), prior, corpus, 8, Category.TECH)
    assert len(picked) == len(set(picked)) == 8
    assert all(corpus[i].category == Category.TECH for i in picked)
    assert corpus[picked[0]].tags == ("topic_00",)


def test_small_category_returns_what_exists(prior):
    items = [
        ContentItem(f"i{j:05d}", Category.AD, (1.0, 0.0), "a00000", j, 0, ("topic_01",))
        for j in range(3)
    ]
    corpus = Corpus(items, 2)
    assert cold_start_recall(_profile(), prior, corpus, 10, Category.AD) == [
        "i00002",
        "i00001",
        "i00000",
    ]
    assert cold_start_recall(_profile(), prior, Corpus([], 2), 10) == []
    with pytest.raises(ValueError):
        cold_start_recall(_profile(), prior, corpus, 0)


def test_point_mass_bucket_is_category_popularity(corpus):
    prior = DemographicPrior({"25-34|student": {"Gossip": 1.0}})
    assert cold_start_recall(_profile(), prior, corpus, 3) == cold_start_recall(
        _profile(KycTier.NO_KYC), prior, corpus, 3, Category.GOSSIP
    )


def test_even_split_ties_by_category_name(corpus):
    prior = DemographicPrior({"25-34|student": {"News": 0.5, "Tech": 0.5}})
    picked = cold_start_recall(_profile(), prior, corpus, 5)
    assert [corpus[i].category for i in picked] == [Category.NEWS] * 3 + [Category.TECH] * 2


def test_prior_vector_arithmetic():
    space = axis_space()
    prior = DemographicPrior(
        {
            "25-34|student": {"News": 1.0},
            "25-34|clerk": {"Tech": 0.6, "Sharing": 0.4},
        }
    )
    assert np.allclose(
        demographic_prior_vector(_profile(), prior, space), space.category(Category.NEWS)
    )
    mixed = 0.6 * space.category(Category.TECH) + 0.4 * space.category(Category.SHARING)
    assert np.allclose(
        demographic_prior_vector(_profile(occupation="clerk"), prior, space),
        mixed / np.linalg.norm(mixed),
    )
    uniform = demographic_prior_vector(_profile(occupation="pilot"), prior, space)
    mean = np.mean([space.category(c) for c in Category], axis=0)
    assert np.allclose(uniform, mean / np.linalg.norm(mean))
    with pytest.raises(ValueError):
        demographic_prior_vector(_profile(KycTier.NO_KYC), prior, space)
