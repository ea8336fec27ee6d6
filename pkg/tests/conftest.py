import gzip
import json

import pytest


@pytest.fixture
def write_lines(tmp_path):
    """Write raw lines (dicts are JSON-encoded) to a file under tmp_path."""

    def _write(name, lines):
        path = tmp_path / name
        text = "".join((json.dumps(l) if isinstance(l, dict) else l) + "\n" for l in lines)
        if name.endswith(".gz"):
            with gzip.open(path, "wt", encoding="utf-8") as fh:
                fh.write(text)
        else:
            path.write_text(text, encoding="utf-8")
        return path

    return _write


def user(uid, created="2015-05-01", followers=10, friends=5, statuses=100, verified=False):
    return {"user_id": uid, "created_at": created, "followers_count": followers,
            "friends_count": friends, "statuses_count": statuses, "verified": verified}


def tweet(tid, uid, ts, country=None, language=None, hashtags=()):
    return {"tweet_id": tid, "user_id": uid, "timestamp": ts, "country": country,
            "language": language, "hashtags": list(hashtags)}


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, detail, seconds = results[number]
        terminalreporter.write_line(f"[{status}] criterion {number} ({title}, {seconds:.1f}s): {detail}")
