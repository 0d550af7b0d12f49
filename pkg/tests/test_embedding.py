"""
Content and user embeddings across the KYC tiers.
"""

import logging
from dataclasses import replace

import numpy as np
import pytest
from conftest import axis_space

from kycrec.core import (
    Account,
    AccountKind,
    Category,
    ContentItem,
    Corpus,
    Demographics,
    DimensionMismatchError,
    KycTier,
    SocialGraph,
    UserProfile,
    profile_at_tier,
)
from kycrec.pipeline import EmbeddingConfig, EmbeddingSpace, embed_content, embed_user
from kycrec.pipeline.cold_start import DemographicPrior, bucket_key
from kycrec.pipeline.embedding import embed_corpus, popularity_prior, with_global_prior


@pytest.fixture(scope="function", name="space")
def _space():
    yield axis_space()


@pytest.fixture(scope="function", name="corpus")
def _corpus():
    eye = np.eye(8)
    yield Corpus(
        [
            ContentItem("i00001", Category.TECH, tuple(eye[0]), "a00001", 100, 5, ("topic_00",)),
            ContentItem("i00002", Category.NEWS, tuple(eye[1]), "a00002", 0, 6, ("topic_01",)),
            ContentItem("i00003", Category.TECH, tuple(eye[2]), "u0001", 3, 7, ("topic_02",)),
        ],
        dimension=8,
    )


@pytest.fixture(scope="function", name="user")
def _user():
    yield UserProfile(
        "u0001",
        KycTier.ADVANCED_KYC_CIRCLES,
        demographics=Demographics(29, "clerk", "east", 61000.0, "male"),
        declared_tags=frozenset({"topic_00"}),
        bio_keywords=frozenset({"topic_01"}),
        authored_items=("i00003",),
        followed=("a00001",),
    )


def test_content_embedding_is_unit(space, corpus):
    for item in corpus:
        vec = embed_content(item, space)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
    # equal weights put the item halfway between its features and category
    vec = embed_content(corpus["i00001"], space)
    assert vec[0] == pytest.approx(vec[3 + list(Category).index(Category.TECH)])


def test_content_embedding_rejects_wrong_dimension(space):
    item = ContentItem("i00009", Category.AD, (1.0, 0.0), "a00001", 1, 0)
    with pytest.raises(DimensionMismatchError):
        embed_content(item, space)


def test_space_checks_bases():
    with pytest.raises(ValueError):
        EmbeddingSpace(2, {"topic_00": (2.0, 0.0)}, {c: (1.0, 0.0) for c in Category}, (0.0, 0.0))
    with pytest.raises(DimensionMismatchError):
        EmbeddingSpace(3, {"topic_00": (1.0, 0.0)}, {c: (1.0, 0.0, 0.0) for c in Category}, (0.0,) * 3)


def test_global_prior_follows_popularity(space, corpus):
    prior = with_global_prior(space, corpus).prior
    embeddings = embed_corpus(corpus, space)
    assert np.allclose(prior, popularity_prior(embeddings, corpus.popularity))
    # the most popular item dominates the weighted mean
    assert int(np.argmax(prior @ embeddings.T)) == 0
    assert not np.any(popularity_prior(embeddings, np.zeros(3)))


def test_no_kyc_gets_the_global_prior(space, corpus, user):
    spaced = with_global_prior(space, corpus)
    view = profile_at_tier(user, KycTier.NO_KYC)
    assert np.array_equal(embed_user(view, spaced, None, corpus), spaced.prior)


def test_zero_prior_is_flagged(space, corpus, user, caplog):
    view = profile_at_tier(user, KycTier.NO_KYC)
    with caplog.at_level(logging.WARNING):
        vec = embed_user(view, space, None, corpus)
    assert not np.any(vec)
    assert "zero embedding" in caplog.text


def test_every_tier_is_unit_norm(space, corpus, user):
    spaced = with_global_prior(space, corpus)
    graph = SocialGraph([Account("a00001", AccountKind.CREATOR, tuple(np.eye(8)[2]))], [])
    for tier in KycTier:
        vec = embed_user(profile_at_tier(user, tier), spaced, graph, corpus)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)


def test_tiers_add_their_context(space, corpus, user):
    spaced = with_global_prior(space, corpus)
    graph = SocialGraph([Account("a00001", AccountKind.CREATOR, tuple(np.eye(8)[2]))], [])
    basic = embed_user(profile_at_tier(user, KycTier.BASIC_KYC), spaced, graph, corpus)
    advanced = embed_user(profile_at_tier(user, KycTier.ADVANCED_KYC), spaced, graph, corpus)
    circles = embed_user(user, spaced, graph, corpus)

    assert basic[0] > 0.5  # declared tag
    assert basic[1] < 1e-12  # bio keyword is not visible yet
    assert advanced[1] > 0.1
    # authored item and followed account both point at topic_02
    assert circles[2] > advanced[2] > basic[2]


def test_blend_weights_come_from_config(space, corpus, user):
    view = profile_at_tier(user, KycTier.BASIC_KYC)
    tags_only = embed_user(view, space, None, corpus, EmbeddingConfig(basic_blend=(1.0, 0.0)))
    assert np.allclose(tags_only, np.eye(8)[0])


def test_prior_carry_bounds():
    with pytest.raises(ValueError):
        EmbeddingConfig(prior_carry=1.5)
    with pytest.raises(ValueError):
        EmbeddingConfig(prior_carry=-0.1)


def test_content_embedding_on_the_category_axis(space):
    news = space.category(Category.NEWS)
    aligned = ContentItem("i00010", Category.NEWS, tuple(news), "a00001", 1, 0)
    assert np.allclose(embed_content(aligned, space), news, atol=1e-12)
    # without features only the category basis remains
    blank = ContentItem("i00011", Category.NEWS, (0.0,) * 8, "a00001", 1, 0)
    assert np.allclose(embed_content(blank, space), news, atol=1e-12)


def _prior_on(label, demographics):
    return DemographicPrior({bucket_key(demographics): {label: 1.0}})


def test_basic_tier_with_matching_demographic_prior(space, corpus, user):
    view = profile_at_tier(user, KycTier.BASIC_KYC)
    priors = _prior_on("topic_00", user.demographics)
    cfg = EmbeddingConfig(prior_carry=0.0)
    vec = embed_user(view, space, None, corpus, cfg, priors)
    assert np.allclose(vec, space.topic("topic_00"), atol=1e-12)
    # a global prior on the same axis leaves the blend where it was
    aligned = replace(space, global_prior=tuple(space.topic("topic_00")))
    assert np.allclose(embed_user(view, aligned, None, corpus, EmbeddingConfig(), priors), vec, atol=1e-12)


def _collinear(space, followed_vector):
    axis = space.topic("topic_00")
    aligned = replace(space, global_prior=tuple(axis))
    corpus = Corpus(
        [ContentItem("i00020", Category.TECH, tuple(axis), "u0002", 4, 1, ("topic_00",))],
        dimension=8,
    )
    graph = SocialGraph([Account("a00005", AccountKind.CREATOR, tuple(followed_vector))], [])
    full = UserProfile(
        "u0002",
        KycTier.ADVANCED_KYC_CIRCLES,
        demographics=Demographics(41, "nurse", "north", 52000.0, "female"),
        declared_tags=frozenset({"topic_00"}),
        bio_keywords=frozenset({"topic_00"}),
        authored_items=("i00020",),
        followed=("a00005",),
    )
    return aligned, corpus, graph, full, _prior_on("topic_00", full.demographics)


def test_collinear_context_gives_the_same_vector_at_every_tier(space):
    axis = space.topic("topic_00")
    aligned, corpus, graph, full, priors = _collinear(space, axis)
    cfg = EmbeddingConfig(w_cat=0.0, w_feat=1.0)
    for tier in KycTier:
        vec = embed_user(profile_at_tier(full, tier), aligned, graph, corpus, cfg, priors)
        assert np.allclose(vec, axis, atol=1e-12)


def test_circles_with_an_orthogonal_followed_centroid(space):
    aligned, corpus, graph, full, priors = _collinear(space, np.eye(8)[1])
    cfg = EmbeddingConfig(w_cat=0.0, w_feat=1.0)
    advanced = embed_user(profile_at_tier(full, KycTier.ADVANCED_KYC), aligned, graph, corpus, cfg, priors)
    circles = embed_user(full, aligned, graph, corpus, cfg, priors)
    expected = np.zeros(8)
    expected[0], expected[1] = 0.6, 0.4
    expected /= np.sqrt(0.52)
    assert np.allclose(advanced, np.eye(8)[0], atol=1e-12)
    assert np.allclose(circles, expected, atol=1e-12)
