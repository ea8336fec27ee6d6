import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tweet, user
from migrantnet import corpus
from migrantnet.corpus import Tweet, TweetStore, UserProfile
from migrantnet.errors import EmptyStoreError, MissingInputError, NotFoundError, ValidationError


def test_ingest_users_valid(write_lines):
    path = write_lines("users.jsonl", [user("a"), user("b"), user("c")])
    store = corpus.ingest_users(path)
    assert len(store) == 3
    assert store.diagnostics.skipped == 0
    assert store["b"].created_at == dt.date(2015, 5, 1)


def test_ingest_users_skips_malformed(write_lines):
    bad = user("x")
    bad["followers_count"] = -1
    path = write_lines("users.jsonl", [user("a"), "{not json", user("b")])
    store = corpus.ingest_users(path)
    assert len(store) == 2 and store.diagnostics.skipped == 1
    path = write_lines("users2.jsonl", [user("a"), bad])
    assert corpus.ingest_users(path).diagnostics.skipped == 1


def test_ingest_users_duplicate_last_wins(write_lines):
    path = write_lines("users.jsonl", [user("a", followers=1), user("a", followers=2)])
    store = corpus.ingest_users(path)
    assert len(store) == 1
    assert store["a"].followers_count == 2
    assert store.diagnostics.duplicates == 1


def test_ingest_errors(write_lines, tmp_path):
    with pytest.raises(MissingInputError):
        corpus.ingest_users(tmp_path / "nope.jsonl")
    with pytest.raises(EmptyStoreError):
        corpus.ingest_users(write_lines("empty.jsonl", []))
    with pytest.raises(EmptyStoreError):
        corpus.ingest_tweets(write_lines("empty_t.jsonl", []))
    with pytest.raises(EmptyStoreError):
        corpus.ingest_edges(write_lines("empty_e.jsonl", ["garbage"]))


def test_ingest_edges_drops_loops_and_duplicates(write_lines):
    path = write_lines("edges.jsonl", [{"src": "A", "dst": "B"}, {"src": "B", "dst": "A"},
                                       {"src": "A", "dst": "A"}, {"src": "A", "dst": "B"}])
    edges = corpus.ingest_edges(path)
    assert set(edges) == {("A", "B"), ("B", "A")}
    assert edges.diagnostics.self_loops == 1
    assert edges.diagnostics.duplicates == 1


def test_ingest_edges_csv_and_gzip(write_lines):
    path = write_lines("edges.csv.gz", ["src,dst", "A,B", "B,C", "C,C"])
    edges = corpus.ingest_edges(path)
    assert list(edges) == [("A", "B"), ("B", "C")]
    bad = write_lines("edges2.csv", ["from,to", "A,B"])
    with pytest.raises(ValidationError):
        corpus.ingest_edges(bad)


def test_hashtags_normalized(write_lines):
    path = write_lines("tweets.jsonl", [
        tweet("1", "a", "2018-01-01T00:00:00Z", hashtags=["#Love", "ART"])])
    store = corpus.ingest_tweets(path)
    assert store.tweets_of("a")[0].hashtags == ("love", "art")


def test_tweet_validation(write_lines):
    path = write_lines("tweets.jsonl", [
        tweet("1", "a", "2018-01-01T00:00:00Z", country="ZZ"),
        tweet("2", "a", "2018-01-01T00:00:00Z", country="it", language="it"),
        tweet("3", "a", "2018-01-01T00:00:00Z", hashtags=["two words"]),
        tweet("4", "a", "2018-01-01T00:00:00Z", language="und"),
    ])
    store = corpus.ingest_tweets(path)
    assert store.diagnostics.skipped == 2
    got = {t.tweet_id: t for t in store.tweets_of("a")}
    assert got["2"].country == "IT"
    assert got["4"].language is None


def test_ingest_idempotent(write_lines):
    lines = [tweet(str(i), "a", f"2018-01-{i + 1:02d}T00:00:00Z", "IT", "it", ["x"]) for i in range(5)]
    path = write_lines("tweets.jsonl", lines)
    assert corpus.ingest_tweets(path) == corpus.ingest_tweets(path)
    upath = write_lines("users.jsonl", [user("a"), user("b")])
    assert corpus.ingest_users(upath) == corpus.ingest_users(upath)


def _tw(tid, uid, day, country=None, lang=None, tags=()):
    ts = dt.datetime(2018, 1, 1, tzinfo=dt.timezone.utc) + dt.timedelta(days=day)
    return Tweet(tid, uid, ts, country, lang, tuple(tags))


def test_recent_tweet_features_counts():
    store = TweetStore([_tw("1", "a", 0, "IT", "it"), _tw("2", "a", 1, "IT", "fr"),
                        _tw("3", "a", 2, "FR", "fr")])
    assert corpus.recent_tweet_features("a", store) == (2, 2)


def test_recent_tweet_features_empty_and_unknown():
    store = TweetStore([], users=["a"])
    assert corpus.recent_tweet_features("a", store) == (0, 0)
    with pytest.raises(NotFoundError):
        corpus.recent_tweet_features("zzz", store)


def test_recent_tweet_features_window():
    old = [_tw(f"o{i:03d}", "a", i, "DE", "de") for i in range(100)]
    new = [_tw(f"n{i:03d}", "a", 100 + i, "IT", "it") for i in range(200)]
    store = TweetStore(old + new)
    assert corpus.recent_tweet_features("a", store, k=200) == (1, 1)
    assert corpus.recent_tweet_features("a", store, k=300) == (2, 2)
    # date-range filter restricts to the old block
    until = dt.date(2018, 1, 1) + dt.timedelta(days=99)
    assert corpus.recent_tweet_features("a", store, k=200, until=until) == (1, 1)


def test_recency_tie_break_by_tweet_id():
    store = TweetStore([_tw("b", "a", 0, "DE"), _tw("a", "a", 0, "IT")])
    assert [t.tweet_id for t in store.tweets_of("a")] == ["a", "b"]
    assert corpus.recent_tweet_features("a", store, k=1) == (1, 0)
    assert corpus.recent_tweets("a", store, k=1)[0].country == "IT"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.sampled_from(["IT", "FR", "DE", None]),
                          st.sampled_from(["it", "fr", None])), max_size=40),
       st.integers(1, 40), st.integers(1, 40))
def test_recent_features_monotone_in_k(rows, k1, k2):
    k1, k2 = sorted((k1, k2))
    store = TweetStore([_tw(f"{i:03d}", "a", d, c, l) for i, (d, c, l) in enumerate(rows)], users=["a"])
    r1 = corpus.recent_tweet_features("a", store, k1)
    r2 = corpus.recent_tweet_features("a", store, k2)
    assert r1[0] <= r2[0] and r1[1] <= r2[1]


class _Friends:
    def __init__(self, mapping):
        self.mapping = mapping

    def friends(self, uid):
        return self.mapping.get(uid, [])


def test_friend_features():
    store = TweetStore([_tw("1", "f1", 0, "IT", "it"), _tw("2", "f2", 0, "IT", "it"),
                        _tw("3", "f2", 1, "FR", "fr"), _tw("4", "f3", 1, None, None)])
    assert corpus.friend_features("u", _Friends({"u": ["f1", "f2"]}), store) == (2, 2)
    assert corpus.friend_features("u", _Friends({}), store) == (0, 0)
    # a friend with only untagged tweets changes nothing
    assert corpus.friend_features("u", _Friends({"u": ["f1", "f2", "f3"]}), store) == (2, 2)


def _profile(created):
    return UserProfile("a", created, 0, 0, 0, False)


def test_account_age_days():
    assert corpus.account_age_days(_profile(dt.date(2017, 1, 1)), dt.date(2018, 1, 1)) == 365
    assert corpus.account_age_days(_profile(dt.date(2018, 1, 1)), dt.date(2018, 1, 1)) == 0
    # calendar oracle: 2016 is a leap year, so 366 + 365 days
    assert corpus.account_age_days(_profile(dt.date(2016, 1, 1)), dt.date(2018, 1, 1)) == 366 + 365
    with pytest.raises(ValidationError):
        corpus.account_age_days(_profile(dt.date(2019, 1, 1)), dt.date(2018, 1, 1))
    assert corpus.account_age_days(_profile(dt.date(2018, 12, 30))) == 1


def test_hashtag_usage():
    store = TweetStore([_tw("1", "a", 0, tags=["love"]), _tw("2", "a", 1, tags=["love", "art"]),
                        _tw("3", "b", 0)])
    assert corpus.hashtag_usage("a", store) == {"love": 2, "art": 1}
    assert corpus.hashtag_usage("b", store) == {}


def test_hashtag_case_folding(write_lines):
    path = write_lines("tweets.jsonl", [tweet("1", "a", "2018-01-01T00:00:00Z", hashtags=["#TBT"]),
                                        tweet("2", "a", "2018-01-02T00:00:00Z", hashtags=["#tbt"])])
    assert corpus.hashtag_usage("a", corpus.ingest_tweets(path)) == {"tbt": 2}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["a", "b", "c"]), max_size=4), max_size=10))
def test_hashtag_usage_total_multiplicity(tag_lists):
    store = TweetStore([_tw(str(i), "u", i, tags=t) for i, t in enumerate(tag_lists)], users=["u"])
    assert sum(corpus.hashtag_usage("u", store).values()) == sum(len(t) for t in tag_lists)


def test_feature_rows():
    users = corpus.UserStore({"a": UserProfile("a", dt.date(2018, 1, 1), 3, 1, 9, True),
                              "b": UserProfile("b", dt.date(2018, 1, 1), 0, 0, 0, False)})
    store = TweetStore([_tw("1", "a", 0, "IT", "it"), _tw("2", "b", 0, "FR", "fr")])
    edges = corpus.EdgeList.from_pairs([("a", "b")])
    rows, diag = corpus.feature_rows(["a", "b", "c"], users, store, edges)
    assert [r["user_id"] for r in rows] == ["a", "b"]
    assert rows[0]["friend_countries"] == 1 and rows[0]["verified"] == 1
    assert diag == {"missing_profile": 1, "no_friends": 1}
