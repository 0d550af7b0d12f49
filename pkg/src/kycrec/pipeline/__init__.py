from .space import EmbeddingSpace, cosine, l2_normalize
from .recall import (
    AccountIndex,
    ClickLog,
    ContentIndex,
    RecallConfig,
    cooccurrence_recall,
    knn_recall,
    merge_candidates,
    popularity_recall,
    recency_recall,
    social_recall,
    social_recall_bands,
)
from .cold_start import DemographicPrior, allocate, cold_start_recall, largest_remainder
from .embedding import EmbeddingConfig, build_index, embed_content, embed_user
from .propagation import PropagationConfig, propagate, propagated_graph
from .ranking import ExposureStats, RankingWeights, rank, score
from .exploration import ExplorationConfig, ExplorationState
from .rerank import round_robin, truncate
from .recommender import (
    Condition,
    PipelineConfig,
    Recommendation,
    Recommender,
    RerankConfig,
    UnknownConditionError,
)

__all__ = [
    "AccountIndex",
    "ClickLog",
    "Condition",
    "ContentIndex",
    "DemographicPrior",
    "EmbeddingConfig",
    "EmbeddingSpace",
    "ExplorationConfig",
    "ExplorationState",
    "ExposureStats",
    "PipelineConfig",
    "PropagationConfig",
    "RankingWeights",
    "RecallConfig",
    "Recommendation",
    "Recommender",
    "RerankConfig",
    "UnknownConditionError",
    "allocate",
    "build_index",
    "cold_start_recall",
    "cooccurrence_recall",
    "cosine",
    "embed_content",
    "embed_user",
    "knn_recall",
    "l2_normalize",
    "largest_remainder",
    "merge_candidates",
    "popularity_recall",
    "propagate",
    "propagated_graph",
    "rank",
    "recency_recall",
    "round_robin",
    "score",
    "social_recall",
    "social_recall_bands",
    "truncate",
]
