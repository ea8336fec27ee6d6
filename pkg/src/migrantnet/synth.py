"""Deterministic synthetic corpora with planted labels and homophily.

Every user gets a nationality and, for migrants, a different residence.
Tweets are laid out so the labeling rules can recover both: one geo-tagged
tweet per active day at the residence during the reference year, a few
short visits elsewhere, and older tweets from the nationality country.
Follow edges come from a stochastic block model over nationality groups
(``p_in`` within a group, ``p_out`` across), so friends mostly reside in the
user's nationality country.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._io import write_jsonl
from .errors import ValidationError

LANGUAGE_OF = {
    "AR": "es", "AT": "de", "AU": "en", "BE": "fr", "BR": "pt", "CA": "en", "CH": "de",
    "CN": "zh", "DE": "de", "ES": "es", "FR": "fr", "GB": "en", "IE": "en", "IN": "hi",
    "IT": "it", "JP": "ja", "MX": "es", "NL": "nl", "PT": "pt", "RU": "ru", "TR": "tr",
    "US": "en",
}

FILES = ("users.jsonl", "tweets.jsonl", "edges.jsonl", "ground_truth.jsonl")


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs.

    ``tweets_per_user`` is the number of residence tweets in ``year``, one per
    distinct day, so it doubles as the number of active days.
    """

    n_users: int = 1000
    migrant_fraction: float = 0.1
    countries: tuple = ("DE", "FR", "GB", "IT", "US")
    p_in: float = 0.02
    p_out: float = 0.001
    tweets_per_user: int = 40
    home_tweets: int = 20
    visit_days: int = 3
    untagged_tweets: int = 2
    vocab_size: int = 50
    local_tag_share: float = 0.6
    year: int = 2018
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "countries", tuple(self.countries))
        if self.n_users < 1:
            raise ValidationError("n_users must be >= 1")
        for name in ("migrant_fraction", "p_in", "p_out", "local_tag_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        if len(set(self.countries)) != len(self.countries) or not self.countries:
            raise ValidationError("countries must be a non-empty list of distinct codes")
        if len(self.countries) < 2 and self.migrant_fraction > 0:
            raise ValidationError("migrants need at least two countries")
        if not 1 <= self.tweets_per_user <= 365 or not 0 <= self.visit_days <= 365:
            raise ValidationError("tweets_per_user and visit_days must fit in one year")
        for name in ("home_tweets", "untagged_tweets", "vocab_size"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")

    def as_dict(self):
        d = asdict(self)
        d["countries"] = list(self.countries)
        return d


@dataclass
class SynthCorpus:
    users: list = field(default_factory=list)
    tweets: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    ground_truth: list = field(default_factory=list)


def _sbm_edges(rng, groups, p_in, p_out):
    """Directed block-model edges without self-loops, as two int arrays."""
    members = [np.flatnonzero(groups == g) for g in range(groups.max() + 1)]
    src_parts, dst_parts = [], []
    for g, mg in enumerate(members):
        for h, mh in enumerate(members):
            p = p_in if g == h else p_out
            ng, nh = len(mg), len(mh)
            n_pairs = ng * (ng - 1) if g == h else ng * nh
            if p == 0 or n_pairs == 0:
                continue
            m = int(rng.binomial(n_pairs, p))
            picked = np.empty(0, dtype=np.int64)
            while len(picked) < m:
                draw = rng.integers(0, n_pairs, size=m - len(picked))
                picked = np.unique(np.concatenate([picked, draw]))
            if g == h:
                i, j = np.divmod(picked, ng - 1)
                j = j + (j >= i)
            else:
                i, j = np.divmod(picked, nh)
            src_parts.append(mg[i])
            dst_parts.append(mh[j])
    if not src_parts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    src, dst = np.concatenate(src_parts), np.concatenate(dst_parts)
    order = np.lexsort((dst, src))
    return src[order], dst[order]


def _timestamp(day: dt.date, seconds: int) -> str:
    return (f"{day.isoformat()}T{seconds // 3600:02d}:{seconds // 60 % 60:02d}:"
            f"{seconds % 60:02d}Z")


def generate(config: SynthConfig) -> SynthCorpus:
    """Build the synthetic corpus in memory; all randomness comes from ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    countries = list(config.countries)
    n, c = config.n_users, len(countries)
    uid = [f"u{i:07d}" for i in range(n)]

    nat = rng.integers(0, c, size=n)
    n_mig = int(round(config.migrant_fraction * n)) if c > 1 else 0
    is_mig = np.zeros(n, dtype=bool)
    is_mig[rng.permutation(n)[:n_mig]] = True
    res = nat.copy()
    shift = rng.integers(1, c, size=n) if c > 1 else np.zeros(n, dtype=np.int64)
    res[is_mig] = (nat[is_mig] + shift[is_mig]) % c

    src, dst = _sbm_edges(rng, nat, config.p_in, config.p_out)
    out_deg = np.bincount(src, minlength=n)
    in_deg = np.bincount(dst, minlength=n)

    corpus = SynthCorpus()
    corpus.edges = [{"src": uid[s], "dst": uid[d]} for s, d in zip(src.tolist(), dst.tolist())]

    year_start = dt.date(config.year, 1, 1)
    year_len = (dt.date(config.year + 1, 1, 1) - year_start).days
    history_start = dt.date(config.year - 3, 1, 1)
    history_len = (year_start - history_start).days
    created_lo = dt.date(2007, 1, 1).toordinal()
    created_hi = dt.date(config.year, 12, 31).toordinal()
    lang = [LANGUAGE_OF.get(x, x.lower()) for x in countries]
    local_tags = [[f"{x.lower()}tag{k}" for k in range(config.vocab_size)] for x in countries]
    global_tags = [f"tag{k}" for k in range(config.vocab_size)]
    # Zipf-like popularity inside each vocabulary
    if config.vocab_size:
        pop = 1.0 / np.arange(1, config.vocab_size + 1)
        pop /= pop.sum()

    tweet_no = 0
    for i in range(n):
        status = "Migrant" if is_mig[i] else "Native"
        corpus.ground_truth.append({"user_id": uid[i], "nationality": countries[nat[i]],
                                    "residence": countries[res[i]], "status": status})
        created = dt.date.fromordinal(int(rng.integers(created_lo, created_hi + 1)))
        n_tweets = config.tweets_per_user + config.home_tweets + config.visit_days + config.untagged_tweets
        corpus.users.append({
            "user_id": uid[i],
            "created_at": created.isoformat(),
            "followers_count": int(in_deg[i] + rng.poisson(50 * (1.5 if is_mig[i] else 1.0))),
            "friends_count": int(out_deg[i]),
            "statuses_count": int(n_tweets + rng.poisson(200)),
            "verified": bool(rng.random() < (0.05 if is_mig[i] else 0.037)),
        })

        plan = []  # (date, country index or -1)
        for d in rng.choice(year_len, size=config.tweets_per_user, replace=False).tolist():
            plan.append((year_start + dt.timedelta(days=d), int(res[i])))
        for d in rng.choice(year_len, size=config.visit_days, replace=False).tolist():
            if is_mig[i] and rng.random() < 0.5:
                where = int(nat[i])
            else:
                where = int((res[i] + rng.integers(1, c)) % c) if c > 1 else int(res[i])
            plan.append((year_start + dt.timedelta(days=d), where))
        for d in rng.integers(0, history_len, size=config.home_tweets).tolist():
            plan.append((history_start + dt.timedelta(days=d), int(nat[i])))
        for d in rng.integers(0, year_len, size=config.untagged_tweets).tolist():
            plan.append((year_start + dt.timedelta(days=d), -1))

        secs = rng.integers(0, 86400, size=len(plan)).tolist()
        speak_home = (rng.random(len(plan)) < (0.5 if is_mig[i] else 0.0)).tolist()
        n_tags = rng.integers(0, 3, size=len(plan)) if config.vocab_size else np.zeros(len(plan), int)
        total_tags = int(n_tags.sum())
        tag_local = (rng.random(total_tags) < config.local_tag_share).tolist()
        tag_rank = rng.choice(config.vocab_size, size=total_tags, p=pop).tolist() if total_tags else []
        bounds = np.concatenate([[0], np.cumsum(n_tags)]).tolist()
        for t, ((day, where), sec, home_lang) in enumerate(zip(plan, secs, speak_home)):
            place = where if where >= 0 else int(res[i])
            tags = [local_tags[place][tag_rank[q]] if tag_local[q] else global_tags[tag_rank[q]]
                    for q in range(bounds[t], bounds[t + 1])]
            corpus.tweets.append({
                "tweet_id": f"t{tweet_no:09d}",
                "user_id": uid[i],
                "timestamp": _timestamp(day, sec),
                "country": countries[where] if where >= 0 else None,
                "language": lang[nat[i]] if home_lang else lang[place],
                "hashtags": tags,
            })
            tweet_no += 1
    return corpus


def write(corpus: SynthCorpus, out_dir, compress=False) -> dict:
    """Write the four JSONL files; returns ``{name: path}``."""
    out_dir = Path(out_dir)
    suffix = ".gz" if compress else ""
    paths = {}
    for name, records in zip(FILES, (corpus.users, corpus.tweets, corpus.edges, corpus.ground_truth)):
        path = out_dir / (name + suffix)
        write_jsonl(path, records)
        paths[name] = path
    return paths


def generate_files(config: SynthConfig, out_dir, compress=False) -> dict:
    return write(generate(config), out_dir, compress=compress)
