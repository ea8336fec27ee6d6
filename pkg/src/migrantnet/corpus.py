"""Ingest archived tweet corpora and extract per-user features.

Three newline-delimited JSON inputs are understood (each may be gzipped):

* ``users.jsonl``  -- one :class:`UserProfile` per line
* ``tweets.jsonl`` -- one :class:`Tweet` per line
* ``edges.jsonl``  -- ``{"src": ..., "dst": ...}`` follow edges, or ``edges.csv``
  with a ``src,dst`` header

Stores are immutable once built and keep a diagnostics tally of what was
dropped on the way in.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import re
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from ._io import iter_jsonl, open_text
from ._iso import ISO_ALPHA2
from .errors import EmptyStoreError, NotFoundError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_REFERENCE_DATE = dt.date(2018, 12, 31)
DEFAULT_RECENT_K = 200

_LANG_RE = re.compile(r"^[A-Za-z]{2,8}(-[A-Za-z0-9]{1,8})*$")


@dataclass(frozen=True, slots=True)
class UserProfile:
    user_id: str
    created_at: dt.date
    followers_count: int
    friends_count: int
    statuses_count: int
    verified: bool


@dataclass(frozen=True, slots=True)
class Tweet:
    tweet_id: str
    user_id: str
    timestamp: dt.datetime
    country: Optional[str]
    language: Optional[str]
    hashtags: tuple[str, ...]


@dataclass
class IngestDiagnostics:
    records: int = 0
    skipped: int = 0
    duplicates: int = 0
    self_loops: int = 0

    def as_dict(self):
        return {"records": self.records, "skipped": self.skipped,
                "duplicates": self.duplicates, "self_loops": self.self_loops}


# --------------------------------------------------------------------------
# field parsing; every helper raises ValueError/TypeError on bad input


def _key(value):
    if not isinstance(value, str) or not value:
        raise ValueError("key must be a non-empty string")
    return value


def _count(value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"expected non-negative integer, got {value!r}")
    return value


def parse_date(value) -> dt.date:
    if not isinstance(value, str):
        raise ValueError("date must be a string")
    if len(value) == 10:
        return dt.date.fromisoformat(value)
    return parse_timestamp(value).date()


def parse_timestamp(value) -> dt.datetime:
    if not isinstance(value, str):
        raise ValueError("timestamp must be a string")
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = dt.datetime.fromisoformat(value)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc)


def normalize_country(value) -> Optional[str]:
    if value is None or value == "":
        return None
    if not isinstance(value, str) or value.upper() not in ISO_ALPHA2:
        raise ValueError(f"unrecognized country code {value!r}")
    return value.upper()


def normalize_language(value) -> Optional[str]:
    # "und" is Twitter's undetermined-language marker
    if value is None or value == "" or value == "und":
        return None
    if not isinstance(value, str) or not _LANG_RE.match(value):
        raise ValueError(f"malformed language tag {value!r}")
    return value


def normalize_hashtag(tag) -> str:
    if not isinstance(tag, str):
        raise ValueError("hashtag must be a string")
    tag = tag.strip().lstrip("#").lower()
    if not tag or any(ch.isspace() for ch in tag) or "#" in tag:
        raise ValueError(f"malformed hashtag {tag!r}")
    return tag


def profile_from_record(rec: dict) -> UserProfile:
    verified = rec.get("verified", False)
    if not isinstance(verified, bool):
        raise ValueError("verified must be boolean")
    return UserProfile(
        user_id=_key(rec["user_id"]),
        created_at=parse_date(rec["created_at"]),
        followers_count=_count(rec["followers_count"]),
        friends_count=_count(rec["friends_count"]),
        statuses_count=_count(rec["statuses_count"]),
        verified=verified,
    )


def tweet_from_record(rec: dict) -> Tweet:
    tags = rec.get("hashtags") or []
    if not isinstance(tags, list):
        raise ValueError("hashtags must be a list")
    return Tweet(
        tweet_id=_key(rec["tweet_id"]),
        user_id=_key(rec["user_id"]),
        timestamp=parse_timestamp(rec["timestamp"]),
        country=normalize_country(rec.get("country")),
        language=normalize_language(rec.get("language")),
        hashtags=tuple(normalize_hashtag(t) for t in tags),
    )


def _read_records(path, parse, diag):
    for lineno, rec in iter_jsonl(path):
        if rec is None:
            diag.skipped += 1
            continue
        try:
            obj = parse(rec)
        except (KeyError, ValueError, TypeError) as exc:
            logger.debug("%s:%d skipped: %s", path, lineno, exc)
            diag.skipped += 1
            continue
        yield obj
    if diag.skipped:
        logger.info("%s: skipped %d malformed line(s)", path, diag.skipped)


# --------------------------------------------------------------------------
# stores


class UserStore(Mapping):
    """Read-only mapping ``user_id -> UserProfile``."""

    def __init__(self, profiles: dict[str, UserProfile], diagnostics=None):
        self._profiles = dict(sorted(profiles.items()))
        self.diagnostics = diagnostics or IngestDiagnostics(records=len(profiles))

    def __getitem__(self, user_id):
        try:
            return self._profiles[user_id]
        except KeyError:
            raise NotFoundError(f"unknown user {user_id!r}") from None

    def __iter__(self):
        return iter(self._profiles)

    def __len__(self):
        return len(self._profiles)

    def __eq__(self, other):
        return isinstance(other, UserStore) and self._profiles == other._profiles

    __hash__ = None


class TweetStore:
    """Tweets grouped by author, each group ordered most recent first.

    Ordering inside a group is by timestamp descending, ties broken by
    ``tweet_id`` ascending.
    """

    def __init__(self, tweets: Iterable[Tweet], diagnostics=None, users: Iterable[str] = ()):
        groups: dict[str, list[Tweet]] = {u: [] for u in users}
        for t in tweets:
            groups.setdefault(t.user_id, []).append(t)
        self._by_user = {
            u: tuple(sorted(ts, key=_recency_key)) for u, ts in sorted(groups.items())
        }
        self.diagnostics = diagnostics or IngestDiagnostics(
            records=sum(len(v) for v in self._by_user.values()))

    def __contains__(self, user_id):
        return user_id in self._by_user

    def __len__(self):
        return sum(len(v) for v in self._by_user.values())

    def __eq__(self, other):
        return isinstance(other, TweetStore) and self._by_user == other._by_user

    __hash__ = None

    def users(self):
        return self._by_user.keys()

    def tweets_of(self, user_id) -> tuple[Tweet, ...]:
        try:
            return self._by_user[user_id]
        except KeyError:
            raise NotFoundError(f"unknown user {user_id!r}") from None

    def get(self, user_id) -> tuple[Tweet, ...]:
        return self._by_user.get(user_id, ())

    def with_users(self, user_ids: Iterable[str]) -> "TweetStore":
        """Return a store that also knows ``user_ids`` (as users with no tweets)."""
        return TweetStore((t for ts in self._by_user.values() for t in ts),
                          self.diagnostics, users=list(self._by_user) + list(user_ids))


def _recency_key(t: Tweet):
    return (-t.timestamp.timestamp(), t.tweet_id)


@dataclass(frozen=True)
class EdgeList:
    """Deduplicated, self-loop free follow edges, sorted by ``(src, dst)``."""

    edges: tuple[tuple[str, str], ...]
    diagnostics: IngestDiagnostics = field(default_factory=IngestDiagnostics, compare=False)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], diagnostics=None):
        diag = diagnostics or IngestDiagnostics()
        seen = set()
        for src, dst in pairs:
            if src == dst:
                diag.self_loops += 1
                continue
            if (src, dst) in seen:
                diag.duplicates += 1
                continue
            seen.add((src, dst))
        diag.records = len(seen)
        return cls(tuple(sorted(seen)), diag)

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def successors(self) -> dict[str, list[str]]:
        try:
            return self._succ
        except AttributeError:
            succ: dict[str, list[str]] = {}
            for s, d in self.edges:
                succ.setdefault(s, []).append(d)
            object.__setattr__(self, "_succ", succ)
            return succ

    def friends(self, user_id) -> list[str]:
        return self.successors().get(user_id, [])


# --------------------------------------------------------------------------
# ingest


def ingest_users(path) -> UserStore:
    """Load ``users.jsonl``; malformed lines are skipped, later duplicates win."""
    profiles: dict[str, UserProfile] = {}
    diag = IngestDiagnostics()
    for prof in _read_records(path, profile_from_record, diag):
        if prof.user_id in profiles:
            diag.duplicates += 1
        profiles[prof.user_id] = prof
    if not profiles:
        raise EmptyStoreError(f"{path}: no valid user record")
    diag.records = len(profiles)
    return UserStore(profiles, diag)


def ingest_tweets(path, users: Iterable[str] = ()) -> TweetStore:
    tweets: dict[str, Tweet] = {}
    diag = IngestDiagnostics()
    for tw in _read_records(path, tweet_from_record, diag):
        if tw.tweet_id in tweets:
            diag.duplicates += 1
        tweets[tw.tweet_id] = tw
    if not tweets:
        raise EmptyStoreError(f"{path}: no valid tweet record")
    diag.records = len(tweets)
    return TweetStore(tweets.values(), diag, users=users)


def _edge_from_record(rec):
    return _key(rec["src"]), _key(rec["dst"])


def ingest_edges(path) -> EdgeList:
    """Load follow edges from ``.jsonl`` or ``.csv`` (optionally ``.gz``)."""
    diag = IngestDiagnostics()
    suffixes = Path(path).suffixes
    if ".csv" in suffixes:
        pairs = list(_csv_edges(path, diag))
    else:
        pairs = list(_read_records(path, _edge_from_record, diag))
    if not pairs:
        raise EmptyStoreError(f"{path}: no valid edge record")
    return EdgeList.from_pairs(pairs, diag)


def _csv_edges(path, diag):
    with open_text(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return
        if [h.strip() for h in header] != ["src", "dst"]:
            raise ValidationError(f"{path}: expected header 'src,dst', got {header!r}")
        for row in reader:
            if not row:
                continue
            if len(row) != 2 or not row[0] or not row[1]:
                diag.skipped += 1
                continue
            yield row[0], row[1]


# --------------------------------------------------------------------------
# per-user features


def recent_tweets(user_id, store: TweetStore, k=DEFAULT_RECENT_K, since=None, until=None):
    """The ``k`` most recent tweets of a user, optionally restricted to a date range.

    ``since``/``until`` are inclusive calendar dates (UTC).
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    tweets = store.tweets_of(user_id)
    if since is not None or until is not None:
        tweets = tuple(
            t for t in tweets
            if (since is None or t.timestamp.date() >= since)
            and (until is None or t.timestamp.date() <= until)
        )
    return tweets[:k]


def recent_tweet_features(user_id, store: TweetStore, k=DEFAULT_RECENT_K, since=None, until=None):
    """Distinct (countries, languages) among a user's ``k`` most recent tweets."""
    tweets = recent_tweets(user_id, store, k, since, until)
    countries = {t.country for t in tweets if t.country is not None}
    languages = {t.language for t in tweets if t.language is not None}
    return len(countries), len(languages)


def friend_features(user_id, graph, store: TweetStore, k=DEFAULT_RECENT_K):
    """Distinct countries/languages pooled over each friend's ``k`` most recent tweets.

    ``graph`` is anything exposing ``friends(user_id)`` (an :class:`EdgeList`
    or a :class:`~migrantnet.graph.SocialGraph`). Friends missing from the
    tweet store contribute nothing.
    """
    countries, languages = set(), set()
    for friend in graph.friends(user_id):
        for t in store.get(friend)[:k]:
            if t.country is not None:
                countries.add(t.country)
            if t.language is not None:
                languages.add(t.language)
    return len(countries), len(languages)


def account_age_days(profile: UserProfile, reference_date=DEFAULT_REFERENCE_DATE) -> int:
    if profile.created_at > reference_date:
        raise ValidationError(
            f"user {profile.user_id!r} created {profile.created_at} after reference {reference_date}")
    return (reference_date - profile.created_at).days


def hashtag_usage(user_id, store: TweetStore) -> Counter:
    usage = Counter()
    for t in store.tweets_of(user_id):
        usage.update(t.hashtags)
    return usage


FEATURE_COLUMNS = (
    "account_age_days", "followers_count", "friends_count", "statuses_count", "verified",
    "tweet_countries", "tweet_languages", "friend_countries", "friend_languages",
)


def feature_rows(user_ids, users: UserStore, tweets: TweetStore, edges, k=DEFAULT_RECENT_K,
                 reference_date=DEFAULT_REFERENCE_DATE):
    """Profile and tweet features for each user, in the given order.

    Returns ``(rows, diagnostics)`` where each row is a dict keyed by
    :data:`FEATURE_COLUMNS` plus ``user_id``. Users without a profile are
    skipped and counted.
    """
    diag = Counter()
    rows = []
    for uid in user_ids:
        if uid not in users:
            diag["missing_profile"] += 1
            continue
        prof = users[uid]
        try:
            age = account_age_days(prof, reference_date)
        except ValidationError:
            diag["created_after_reference"] += 1
            continue
        tc, tl = recent_tweet_features(uid, tweets, k) if uid in tweets else (0, 0)
        if not edges.friends(uid):
            diag["no_friends"] += 1
        fc, fl = friend_features(uid, edges, tweets, k)
        rows.append({
            "user_id": uid,
            "account_age_days": age,
            "followers_count": prof.followers_count,
            "friends_count": prof.friends_count,
            "statuses_count": prof.statuses_count,
            "verified": int(prof.verified),
            "tweet_countries": tc,
            "tweet_languages": tl,
            "friend_countries": fc,
            "friend_languages": fl,
        })
    return rows, dict(diag)
