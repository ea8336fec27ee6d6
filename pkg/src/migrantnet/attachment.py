"""Hashtag country labels and Home/Destination Attachment scores.

A hashtag is attributed to the country where most of the natives using it
reside, unless its usage is spread across countries (normalized entropy
above a threshold) or too few natives use it. A user's Home Attachment is
the share of their country-labeled hashtag occurrences that belong to their
nationality; Destination Attachment is the same share for their residence.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import ValidationError
from .labeling import Status, UserLabel

DEFAULT_ENTROPY_THRESHOLD = 0.5
DEFAULT_MIN_SUPPORT = 5


@dataclass(frozen=True)
class HashtagLabel:
    country: Optional[str]
    entropy: float
    support: int


def normalized_entropy(counts: Iterable[int]) -> float:
    """Shannon entropy of ``counts`` divided by ``ln(m)``, ``m`` the number of non-zero entries."""
    counts = [c for c in counts if c > 0]
    m = len(counts)
    if m <= 1:
        return 0.0
    total = sum(counts)
    h = -sum((c / total) * math.log(c / total) for c in counts)
    return min(1.0, h / math.log(m))


def native_usages(labels: Iterable[UserLabel], usage_by_user: Mapping[str, Counter]):
    """hashtag -> {country: number of distinct natives resident there using it}."""
    out: dict[str, Counter] = {}
    for label in labels:
        if label.status is not Status.NATIVE:
            continue
        for tag in usage_by_user.get(label.user_id, ()):
            out.setdefault(tag, Counter())[label.residence] += 1
    return out


def build_hashtag_table(native_usages: Mapping[str, Mapping[str, int]],
                        threshold: float = DEFAULT_ENTROPY_THRESHOLD,
                        min_support: int = DEFAULT_MIN_SUPPORT) -> dict[str, HashtagLabel]:
    table = {}
    for tag in sorted(native_usages):
        dist = {c: n for c, n in native_usages[tag].items() if n > 0}
        support = sum(dist.values())
        if not dist:
            continue
        h = normalized_entropy(dist.values())
        country = None
        if support >= min_support and h <= threshold:
            country = min(dist, key=lambda c: (-dist[c], c))
        table[tag] = HashtagLabel(country, h, support)
    return table


@dataclass(frozen=True)
class AttachmentScore:
    user_id: str
    status: Status
    ha: Optional[float]
    da: Optional[float]
    labeled_occurrences: int


def attachment_scores(label: UserLabel, usage: Mapping[str, int],
                      table: Mapping[str, HashtagLabel]) -> Optional[AttachmentScore]:
    """HA/DA for one user; ``None`` for users of Unknown status."""
    if label.status is Status.UNKNOWN:
        return None
    per_country = Counter()
    for tag, n in usage.items():
        entry = table.get(tag)
        if entry is not None and entry.country is not None:
            per_country[entry.country] += n
    denom = sum(per_country.values())
    if denom == 0:
        return AttachmentScore(label.user_id, label.status, None, None, 0)
    ha = per_country[label.nationality] / denom
    da = per_country[label.residence] / denom
    return AttachmentScore(label.user_id, label.status, ha, da, denom)


def score_users(labels: Iterable[UserLabel], usage_by_user: Mapping[str, Counter],
                table: Mapping[str, HashtagLabel]):
    """Scores for every labeled user plus a count of skipped Unknown users."""
    scores, skipped = [], 0
    for label in labels:
        s = attachment_scores(label, usage_by_user.get(label.user_id, {}), table)
        if s is None:
            skipped += 1
        else:
            scores.append(s)
    return scores, {"unknown_skipped": skipped}


def _hist(values, bins):
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    mean = float(np.mean(values)) if len(values) else None
    return {"edges": edges.tolist(), "counts": counts.tolist(), "mean": mean, "n": len(values)}


def attachment_histograms(scores: Iterable[AttachmentScore], group: Status, bins: int = 20):
    """Binned HA and DA over [0, 1] for one status group; undefined scores are excluded."""
    members = [s for s in scores if s.status is group and s.ha is not None]
    return {
        "group": group.value,
        "ha": _hist([s.ha for s in members], bins),
        "da": _hist([s.da for s in members], bins),
    }


def top_hashtags(usage_by_user: Mapping[str, Counter], labels: Mapping[str, UserLabel],
                 group: Status, k: int = 10):
    """Top ``k`` hashtags within a status group, counts scaled by the group maximum.

    Ties in count are ordered lexicographically.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    total = Counter()
    for uid, usage in usage_by_user.items():
        label = labels.get(uid)
        if label is not None and label.status is group:
            total.update(usage)
    ranked = sorted(total.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    if not ranked:
        return []
    top = ranked[0][1]
    return [(tag, n / top) for tag, n in ranked]
