"""Residence, nationality and migrant/native status per user.

Residence is the country with the most distinct geo-tagged days in the
reference year. Nationality mixes the user's own long-run tweet locations
with the residences of the accounts they follow. Labeling runs in two
passes: residences for everyone first, then nationalities using those
residences as friend evidence.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Tweet, TweetStore
from .errors import ValidationError


class Status(str, enum.Enum):
    MIGRANT = "Migrant"
    NATIVE = "Native"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class LabelingConfig:
    year: int = 2018
    min_residence_days: int = 10
    beta: float = 0.5
    min_nationality_evidence: int = 5

    def __post_init__(self):
        if self.min_residence_days < 1 or self.min_nationality_evidence < 1:
            raise ValidationError("labeling thresholds must be >= 1")
        if not 0.0 <= self.beta <= 1.0:
            raise ValidationError(f"beta must lie in [0, 1], got {self.beta}")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class UserLabel:
    user_id: str
    residence: Optional[str]
    nationality: Optional[str]
    status: Status = field(init=False)
    evidence: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "status", classify(self))

    def to_record(self):
        return {
            "user_id": self.user_id,
            "residence": self.residence,
            "nationality": self.nationality,
            "status": self.status.value,
            "evidence": self.evidence,
        }

    @classmethod
    def from_record(cls, rec):
        label = cls(rec["user_id"], rec.get("residence"), rec.get("nationality"),
                    evidence=rec.get("evidence") or {})
        if rec.get("status") not in (None, label.status.value):
            raise ValidationError(
                f"label for {label.user_id!r} has status {rec['status']!r} inconsistent with its countries")
        return label


def classify(label) -> Status:
    if label.residence is None or label.nationality is None:
        return Status.UNKNOWN
    if label.residence != label.nationality:
        return Status.MIGRANT
    return Status.NATIVE


def residence_evidence(tweets: Iterable[Tweet], year: int):
    """Distinct active days and tweet counts per country within ``year``."""
    days: dict[str, set] = {}
    counts: Counter = Counter()
    all_days = set()
    for t in tweets:
        if t.country is None or t.timestamp.year != year:
            continue
        day = t.timestamp.date()
        days.setdefault(t.country, set()).add(day)
        counts[t.country] += 1
        all_days.add(day)
    day_counts = {c: len(d) for c, d in sorted(days.items())}
    return day_counts, dict(sorted(counts.items())), len(all_days)


def infer_residence(user_id, tweets: Sequence[Tweet], config: LabelingConfig = LabelingConfig()):
    """Country where the user spent the most distinct geo-tagged days in ``config.year``.

    Ties go to the country with more geo-tagged tweets, then to the smaller
    country code. Returns ``None`` when the user has fewer than
    ``config.min_residence_days`` geo-tagged days in total.
    """
    country, _ = _residence_with_evidence(tweets, config)
    return country


def _residence_with_evidence(tweets, config):
    day_counts, tweet_counts, total_days = residence_evidence(tweets, config.year)
    evidence = {"residence_days": day_counts, "residence_total_days": total_days}
    if total_days < config.min_residence_days or not day_counts:
        return None, evidence
    best = min(day_counts, key=lambda c: (-day_counts[c], -tweet_counts[c], c))
    return best, evidence


def nationality_scores(tweets: Iterable[Tweet], friend_residences: Iterable[Optional[str]],
                       beta: float):
    """Per-country nationality score and the evidence count behind it.

    score(c) = beta * share of the user's geo-tagged tweets in c
             + (1 - beta) * share of labeled friends resident in c
    """
    own = Counter(t.country for t in tweets if t.country is not None)
    friends = Counter(c for c in friend_residences if c is not None)
    n_own, n_friends = sum(own.values()), sum(friends.values())
    scores = {}
    for c in set(own) | set(friends):
        s = 0.0
        if n_own:
            s += beta * own[c] / n_own
        if n_friends:
            s += (1.0 - beta) * friends[c] / n_friends
        scores[c] = s
    return dict(sorted(scores.items())), n_own, n_friends


def infer_nationality(user_id, all_tweets: Sequence[Tweet], friend_residences,
                      config: LabelingConfig = LabelingConfig()):
    country, _ = _nationality_with_evidence(all_tweets, friend_residences, config)
    return country


def _nationality_with_evidence(all_tweets, friend_residences, config):
    scores, n_own, n_friends = nationality_scores(all_tweets, friend_residences, config.beta)
    evidence = {"nationality_scores": scores, "geo_tweets": n_own, "labeled_friends": n_friends}
    if n_own + n_friends < config.min_nationality_evidence or not scores:
        return None, evidence
    # float scores: compare with a small tolerance so arithmetic noise does not beat the lexicographic tie-break
    top = max(scores.values())
    best = min(c for c, s in scores.items() if s >= top - 1e-12)
    return best, evidence


def label_users(user_ids: Iterable[str], tweets: TweetStore, friends,
                config: LabelingConfig = LabelingConfig()) -> list[UserLabel]:
    """Label every user in two passes.

    ``friends`` exposes ``friends(user_id)`` (e.g. an
    :class:`~migrantnet.corpus.EdgeList`). Output is sorted by ``user_id``.
    """
    user_ids = sorted(set(user_ids))
    residences, res_evidence = {}, {}
    for uid in user_ids:
        residences[uid], res_evidence[uid] = _residence_with_evidence(tweets.get(uid), config)
    labels = []
    for uid in user_ids:
        friend_res = [residences.get(f) for f in friends.friends(uid)]
        nationality, nat_evidence = _nationality_with_evidence(tweets.get(uid), friend_res, config)
        labels.append(UserLabel(uid, residences[uid], nationality,
                                evidence={**res_evidence[uid], **nat_evidence}))
    return labels


@dataclass
class MigrationMatrix:
    """Migrant counts from nationality (rows) to residence (columns)."""

    nationalities: list[str]
    residences: list[str]
    counts: np.ndarray

    def total(self) -> int:
        return int(self.counts.sum())

    def get(self, nationality, residence) -> int:
        try:
            return int(self.counts[self.nationalities.index(nationality),
                                   self.residences.index(residence)])
        except ValueError:
            return 0

    def filtered(self, min_count: int) -> "MigrationMatrix":
        """Keep only rows and columns holding at least one cell >= ``min_count``."""
        if self.counts.size == 0:
            return self
        strong = self.counts >= min_count
        rows = np.flatnonzero(strong.any(axis=1))
        cols = np.flatnonzero(strong.any(axis=0))
        return MigrationMatrix([self.nationalities[i] for i in rows],
                               [self.residences[j] for j in cols],
                               self.counts[np.ix_(rows, cols)])

    def to_record(self):
        return {"nationalities": self.nationalities, "residences": self.residences,
                "counts": self.counts.astype(int).tolist()}


def migration_matrix(labels: Iterable[UserLabel], min_count: int = 10):
    """Return ``(full, filtered)`` nationality -> residence migrant flow matrices."""
    flows = Counter((l.nationality, l.residence) for l in labels if l.status is Status.MIGRANT)
    nats = sorted({n for n, _ in flows})
    ress = sorted({r for _, r in flows})
    counts = np.zeros((len(nats), len(ress)), dtype=np.int64)
    for (n, r), c in flows.items():
        counts[nats.index(n), ress.index(r)] = c
    full = MigrationMatrix(nats, ress, counts)
    return full, full.filtered(min_count)


def labels_by_id(labels: Iterable[UserLabel]) -> Mapping[str, UserLabel]:
    return {l.user_id: l for l in labels}
