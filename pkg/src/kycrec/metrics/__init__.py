from .ranking_metrics import ctr_at_k, dcg_at_k, ndcg_at_k, serendipity_at_k
from .tables import MetricTable, build_tables, read_tables, write_tables

__all__ = [
    "MetricTable",
    "build_tables",
    "ctr_at_k",
    "dcg_at_k",
    "ndcg_at_k",
    "read_tables",
    "serendipity_at_k",
    "write_tables",
]
