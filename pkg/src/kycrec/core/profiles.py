from __future__ import annotations

import logging
from dataclasses import replace
from typing import Optional

from .types import KycTier, UserProfile

log = logging.getLogger(__name__)

AGE_RANGE = (18, 60)


def validate_profile(
    profile: UserProfile, followed_count: Optional[int] = None
) -> list[str]:
    """
    Check the tier/field invariants of a profile.

    Args:
        profile: the profile to check
        followed_count: if given, the exact number of followed accounts
            required at AdvancedKycCircles

    Returns:
        Every violated invariant as a message; an empty list means ok.
    """
    tier = profile.kyc_tier
    label = tier.value
    violations: list[str] = []

    if tier >= KycTier.BASIC_KYC:
        if not profile.declared_tags:
            violations.append(f"declared_tags empty at {label}")
        if profile.demographics is None:
            violations.append(f"demographics missing at {label}")
    else:
        if profile.declared_tags:
            violations.append(f"declared_tags present at {label}")
        if profile.demographics is not None:
            violations.append(f"demographics present at {label}")

    if profile.demographics is not None:
        lo, hi = AGE_RANGE
        if not lo <= profile.demographics.age <= hi:
            violations.append(
                f"age {profile.demographics.age} outside [{lo}, {hi}]"
            )
        if profile.demographics.income < 0:
            violations.append("income negative")

    if tier < KycTier.ADVANCED_KYC:
        if profile.bio_keywords:
            violations.append(f"bio_keywords present at {label}")
        if profile.authored_items:
            violations.append(f"authored_items present at {label}")
        if profile.history:
            violations.append(f"history present at {label}")

    if tier < KycTier.ADVANCED_KYC_CIRCLES:
        if profile.followed:
            violations.append(f"followed present at {label}")
    else:
        if len(set(profile.followed)) != len(profile.followed):
            violations.append("followed contains duplicates")
        if followed_count is not None and len(profile.followed) != followed_count:
            violations.append(
                f"followed has {len(profile.followed)} accounts, "
                f"expected {followed_count}"
            )
    return violations


def observable_context(profile: UserProfile) -> int:
    """Number of populated context fields."""
    return sum(
        1
        for present in (
            profile.demographics is not None,
            bool(profile.declared_tags),
            bool(profile.bio_keywords),
            bool(profile.authored_items),
            bool(profile.history),
            bool(profile.followed),
        )
        if present
    )


def profile_at_tier(full: UserProfile, tier: KycTier) -> UserProfile:
    """
    View of a fully populated profile with every field above `tier` masked.
    """
    view = replace(full, kyc_tier=tier)
    if tier < KycTier.ADVANCED_KYC_CIRCLES:
        view = replace(view, followed=())
    if tier < KycTier.ADVANCED_KYC:
        view = replace(view, bio_keywords=frozenset(), authored_items=(), history=())
    if tier < KycTier.BASIC_KYC:
        view = replace(view, declared_tags=frozenset(), demographics=None)
    return view


def raise_tier(profile: UserProfile, tier: KycTier, full: UserProfile) -> UserProfile:
    """Move a profile up to `tier`; tiers never decrease within a run."""
    if tier < profile.kyc_tier:
        raise ValueError(
            f"{profile.user_id}: cannot lower tier "
            f"{profile.kyc_tier.value} -> {tier.value}"
        )
    return profile_at_tier(full, tier)
