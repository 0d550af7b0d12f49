from .graph import SocialGraph, SocialGraphError
from .profiles import observable_context, profile_at_tier, raise_tier, validate_profile
from .records import (
    RecordFormatError,
    build_dataclass,
    dump_jsonl,
    dumps,
    from_record,
    load_jsonl,
    loads,
    register_record,
    to_record,
)
from .store import Corpus
from .types import (
    Account,
    AccountKind,
    Candidate,
    CandidateSet,
    Category,
    ContentItem,
    Demographics,
    DimensionMismatchError,
    FollowEdge,
    Interaction,
    InteractionKind,
    KycTier,
    RankedEntry,
    RankedList,
    Source,
    UserProfile,
    as_tuple,
    as_vector,
    entry_order,
)

__all__ = [
    "Account",
    "AccountKind",
    "Candidate",
    "CandidateSet",
    "Category",
    "ContentItem",
    "Corpus",
    "Demographics",
    "DimensionMismatchError",
    "FollowEdge",
    "Interaction",
    "InteractionKind",
    "KycTier",
    "RankedEntry",
    "RankedList",
    "RecordFormatError",
    "build_dataclass",
    "SocialGraph",
    "SocialGraphError",
    "Source",
    "UserProfile",
    "as_tuple",
    "as_vector",
    "dump_jsonl",
    "dumps",
    "entry_order",
    "from_record",
    "load_jsonl",
    "loads",
    "observable_context",
    "profile_at_tier",
    "raise_tier",
    "register_record",
    "to_record",
    "validate_profile",
]
