"""Command-line pipeline: ``migrantnet [global options] <subcommand>``.

All artifacts land in the working directory and are listed in
``manifest.json`` with their SHA-256 and the configuration that produced
them. Stages read each other's artifacts, so ``graph`` needs a prior
``label`` run and so on; ``report`` runs everything in order.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__, corpus, stats, synth
from ._io import SCHEMA_VERSION, dumps, iter_jsonl, read_json, sha256_file, write_csv, write_json, \
    write_jsonl
from .assortativity import (
    assortativity_histograms,
    categorical_assortativity,
    degree_assortativity,
    local_assortativity,
    mixing_matrix,
)
from .attachment import (
    attachment_histograms,
    build_hashtag_table,
    native_usages,
    score_users,
    top_hashtags,
)
from .config import ENV_PREFIX, PipelineConfig, load_config
from .errors import DegenerateFitError, MigrantNetError, MissingInputError, SchemaError, ValidationError
from .graph import (
    MEASURES,
    all_centralities,
    avg_shortest_path,
    build_graph,
    centrality_correlations,
    degree_sequences,
    fit_power_law,
    giant_component,
    reciprocity,
    top_k,
)
from .labeling import Status, UserLabel, label_users, labels_by_id, migration_matrix

log = logging.getLogger("migrantnet")

EXIT_CODES = """\
exit codes:
  0  success
  1  unexpected internal error
  2  bad command-line usage
  3  missing input (input file, config file, or an artifact of an earlier stage)
  4  schema or validation error (malformed input, bad config value, empty result)
  5  numeric failure (non-convergence, degenerate fit)
On failure a JSON record {"error", "exit_code", "message"} is written to stderr."""

GROUPS = (Status.MIGRANT.value, Status.NATIVE.value)
LOCAL_ATTRS = ("nationality", "residence", "status")


class Workspace:
    """Working directory, resolved config and lazily loaded inputs for one invocation."""

    def __init__(self, root: Path, config: PipelineConfig):
        self.root = Path(root)
        self.config = config
        self._cache = {}
        self.written = {}  # stage -> [artifact names]

    # ------------------------------------------------------------ inputs

    def input_path(self, key):
        path = Path(getattr(self.config, key))
        if not path.is_absolute():
            path = self.root / path
        if not path.exists() and Path(str(path) + ".gz").exists():
            path = Path(str(path) + ".gz")
        return path

    def _cached(self, key, load):
        if key not in self._cache:
            self._cache[key] = load()
        return self._cache[key]

    @property
    def users(self):
        return self._cached("users", lambda: corpus.ingest_users(self.input_path("users")))

    @property
    def tweets(self):
        return self._cached("tweets", lambda: corpus.ingest_tweets(self.input_path("tweets")))

    @property
    def edges(self):
        return self._cached("edges", lambda: corpus.ingest_edges(self.input_path("edges")))

    @property
    def labels(self) -> list[UserLabel]:
        return self._cached("labels", self._load_labels)

    def _load_labels(self):
        path = self.root / "labels.jsonl"
        if not path.is_file():
            raise MissingInputError(f"{path} not found; run the 'label' stage first")
        out = []
        for lineno, rec in iter_jsonl(path):
            try:
                out.append(UserLabel.from_record(rec))
            except (TypeError, KeyError, ValidationError) as exc:
                raise SchemaError(f"{path}:{lineno}: malformed label record ({exc})") from exc
        return out

    def artifact(self, name):
        path = self.root / name
        if not path.is_file():
            raise MissingInputError(f"{path} not found; run the stage that produces it first")
        return path

    @property
    def graph(self):
        def load():
            g = build_graph(self.edges, labels_by_id(self.labels))
            return g, giant_component(g)
        return self._cached("graph", load)

    # ------------------------------------------------------------ outputs

    def meta(self, stage):
        return {"schema_version": SCHEMA_VERSION, "stage": stage, "version": __version__,
                "config": self.config.as_dict()}

    def _record(self, stage, name):
        self.written.setdefault(stage, []).append(name)

    def json(self, stage, name, payload):
        write_json(self.root / name, {"meta": self.meta(stage), **payload})
        self._record(stage, name)

    def csv(self, stage, name, header, rows):
        write_csv(self.root / name, header, rows)
        self._record(stage, name)

    def jsonl(self, stage, name, records):
        write_jsonl(self.root / name, records)
        self._record(stage, name)

    def update_manifest(self):
        path = self.root / "manifest.json"
        manifest = {"schema_version": SCHEMA_VERSION, "artifacts": {}, "stages": {}}
        if path.is_file():
            try:
                old = read_json(path)
                if old.get("schema_version") == SCHEMA_VERSION:
                    manifest.update(artifacts=old.get("artifacts", {}), stages=old.get("stages", {}))
            except (json.JSONDecodeError, AttributeError):
                log.warning("existing manifest unreadable; starting a new one")
        for stage, names in self.written.items():
            for name in names:
                p = self.root / name
                manifest["artifacts"][name] = {"sha256": sha256_file(p), "bytes": p.stat().st_size,
                                               "stage": stage}
            manifest["stages"][stage] = {"artifacts": sorted(names), "config": self.config.as_dict()}
        write_json(path, manifest)
        return manifest


# ---------------------------------------------------------------- stages


def _diag(d):
    return d.as_dict() if hasattr(d, "as_dict") else dict(d)


def stage_synth(ws: Workspace):
    cfg = ws.config.synth()
    paths = synth.generate_files(cfg, ws.root / "data", compress=ws.config.synth_compress)
    for path in paths.values():
        ws._record("synth", str(Path(path).relative_to(ws.root)))
    log.info("synthetic corpus written to %s", ws.root / "data")


def stage_ingest(ws: Workspace):
    users, tweets, edges = ws.users, ws.tweets, ws.edges
    ws.json("ingest", "ingest.json", {
        "users": {"count": len(users), **_diag(users.diagnostics)},
        "tweets": {"count": sum(len(tweets.get(u)) for u in tweets.users()),
                   "users_with_tweets": len(tweets.users()), **_diag(tweets.diagnostics)},
        "edges": {"count": len(edges), **_diag(edges.diagnostics)},
    })


def stage_label(ws: Workspace):
    ids = sorted(set(ws.users) | set(ws.tweets.users()))
    labels = label_users(ids, ws.tweets, ws.edges, ws.config.labeling())
    ws._cache["labels"] = labels
    ws.jsonl("label", "labels.jsonl", [l.to_record() for l in labels])
    full, filtered = migration_matrix(labels, ws.config.min_migration_count)
    tally = Counter(l.status.value for l in labels)
    ws.json("label", "migration_matrix.json", {
        "min_count": ws.config.min_migration_count,
        "full": full.to_record(), "filtered": filtered.to_record(),
        "status_counts": {s.value: tally.get(s.value, 0) for s in Status},
    })


def _usage(ws):
    return ws._cached("usage", lambda: {u: corpus.hashtag_usage(u, ws.tweets) for u in ws.tweets.users()})


def stage_attachment(ws: Workspace):
    labels, cfg = ws.labels, ws.config
    usage = _usage(ws)
    table = build_hashtag_table(native_usages(labels, usage), cfg.entropy_threshold, cfg.min_support)
    ws.csv("attachment", "hashtag_table.csv", ["hashtag", "country", "entropy", "support"],
           ([t, e.country, e.entropy, e.support] for t, e in sorted(table.items())))
    scores, diag = score_users(labels, usage, table)
    ws.csv("attachment", "attachment.csv", ["user_id", "status", "ha", "da", "labeled_occurrences"],
           ([s.user_id, s.status.value, s.ha, s.da, s.labeled_occurrences] for s in scores))
    by_id = labels_by_id(labels)
    ws.json("attachment", "attachment_summary.json", {
        "diagnostics": diag,
        "labeled_hashtags": sum(e.country is not None for e in table.values()),
        "histograms": {g: attachment_histograms(scores, Status(g), cfg.hist_bins) for g in GROUPS},
        "top_hashtags": {g: [{"hashtag": t, "scaled_count": v}
                             for t, v in top_hashtags(usage, by_id, Status(g), cfg.top_k)]
                         for g in GROUPS},
    })


def _feature_rows(ws):
    known = [l.user_id for l in ws.labels if l.status is not Status.UNKNOWN]
    rows, diag = corpus.feature_rows(known, ws.users, ws.tweets, ws.edges, ws.config.recent_k,
                                     ws.config.reference())
    status = {l.user_id: l.status.value for l in ws.labels}
    for r in rows:
        r["status"] = status[r["user_id"]]
    return rows, diag


def stage_features(ws: Workspace):
    rows, diag = _feature_rows(ws)
    cols = ["user_id", "status", *corpus.FEATURE_COLUMNS]
    ws.csv("features", "features.csv", cols, ([r[c] for c in cols] for r in rows))
    ws.json("features", "features_summary.json", {
        "diagnostics": dict(sorted(diag.items())),
        "groups": {c: stats.group_summary({g: [r[c] for r in rows if r["status"] == g] for g in GROUPS})
                   for c in corpus.FEATURE_COLUMNS},
    })


def _fit(values):
    try:
        return fit_power_law(values).as_dict()
    except DegenerateFitError as exc:
        return {"error": str(exc)}


def stage_graph(ws: Workspace):
    cfg = ws.config
    g, giant = ws.graph
    path_mode = "exact" if giant.n_nodes <= cfg.path_exact_max else "sampled"
    paths = avg_shortest_path(giant, mode=path_mode, n_sources=cfg.path_sources, seed=cfg.seed)
    bet_mode = "exact" if giant.n_nodes <= cfg.betweenness_exact_max else "sampled"
    vectors = all_centralities(giant, {"betweenness": {"mode": bet_mode, "n_sources": cfg.betweenness_sources,
                                                        "seed": cfg.seed}})
    status = giant.attribute("status")
    ws.csv("graph", "centrality.csv", ["user_id", "status", *MEASURES],
           ([uid, status[i], *(vectors[m][i].item() for m in MEASURES)]
            for i, uid in enumerate(giant.user_ids)))
    names, corr = centrality_correlations(vectors)
    tops = {}
    for m in MEASURES:
        ranked, tally = top_k(vectors[m], cfg.top_k, giant)
        tops[m] = {"ranked": ranked, "status_counts": tally}
    din, dout, dtot = degree_sequences(giant)
    ws.json("graph", "summary.json", {
        "graph": {"n_nodes": g.n_nodes, "n_edges": g.n_edges, "diagnostics": g.diagnostics},
        "giant_component": {
            "n_nodes": giant.n_nodes, "n_edges": giant.n_edges,
            "share_of_nodes": giant.n_nodes / g.n_nodes,
            "avg_degree": giant.n_edges / giant.n_nodes,
            "reciprocity": reciprocity(giant),
            "avg_shortest_path": {"value": paths.value, "reachable_pair_share": paths.reachable_share,
                                  "mode": paths.mode, "n_sources": paths.n_sources,
                                  "stderr": paths.stderr},
            "betweenness_mode": bet_mode,
        },
        "power_law": {"total": _fit(dtot), "in": _fit(din), "out": _fit(dout)},
        "correlations": {"measures": names, "pearson": corr},
        "top_k": tops,
    })
    _degree_hist(ws, din, dout, dtot)


def _degree_hist(ws, din, dout, dtot):
    """Exact per-degree counts, or log-spaced bins when ``degree_hist_bins > 0``."""
    header = ["degree_lo", "degree_hi", "in_count", "out_count", "total_count"]
    bins = ws.config.degree_hist_bins
    if bins == 0:
        n = int(dtot.max()) + 1
        hist = [np.bincount(d, minlength=n) for d in (din, dout, dtot)]
        rows = ([k, k, int(hist[0][k]), int(hist[1][k]), int(hist[2][k])]
                for k in range(n) if hist[0][k] or hist[1][k] or hist[2][k])
    else:
        # zero degrees cannot sit on a log axis and get their own row
        top = float(max(dtot.max(), 2))
        counts = [stats.histogram(d[d > 0], bins, log_x=True, value_range=(1.0, top))[1]
                  if (d > 0).any() else np.zeros(bins, dtype=np.int64) for d in (din, dout, dtot)]
        edges = np.logspace(0.0, np.log10(top), bins + 1)
        rows = [[0, 0, *(int((d == 0).sum()) for d in (din, dout, dtot))]]
        rows += [[float(edges[i]), float(edges[i + 1]), *(int(c[i]) for c in counts)] for i in range(bins)]
    ws.csv("graph", "degree_hist.csv", header, rows)


def stage_assort(ws: Workspace):
    _, giant = ws.graph
    out = {"graph": {"n_nodes": giant.n_nodes, "n_edges": giant.n_edges, "view": "giant weak component"},
           "degree": {"out_in": degree_assortativity(giant, "out_in"),
                      "total": degree_assortativity(giant, "total")},
           "categorical": {}, "local": {}}
    status = giant.attribute("status")
    for attr in ("nationality", "residence", "status"):
        m = mixing_matrix(giant, attr)
        out["categorical"][attr] = {"r": categorical_assortativity(giant, attr),
                                    "r_undirected": mixing_matrix(giant, attr, undirected=True).coefficient(),
                                    "mixing": m.to_record()}
    for attr in LOCAL_ATTRS:
        try:
            res = local_assortativity(giant, attr, ws.config.alpha_grid)
        except ValidationError as exc:
            out["local"][attr] = {"error": str(exc)}
            continue
        name = f"local_assortativity_{attr}.csv"
        ws.csv("assort", name, ["user_id", "status", "score"],
               ([uid, status[i], res.scores[i].item()] for i, uid in enumerate(res.user_ids)))
        out["local"][attr] = {**res.config(), "global_r": res.global_r, "chance": res.chance,
                              "artifact": name,
                              "histogram": assortativity_histograms(res, status, ws.config.hist_bins),
                              "groups": stats.group_summary({g: res.scores[status == g] for g in GROUPS})}
    ws.json("assort", "global_assortativity.json", out)


def _read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _column_groups(rows, column):
    out = {g: [] for g in GROUPS}
    for r in rows:
        if r["status"] in out and r[column] != "":
            out[r["status"]].append(float(r[column]))
    return out


def stage_compare(ws: Workspace):
    cfg = ws.config
    metrics = {}
    feat_path = ws.root / "features.csv"
    if feat_path.is_file():
        rows = _read_csv(feat_path)
    else:
        rows = [{k: ("" if v is None else v) for k, v in r.items()} for r in _feature_rows(ws)[0]]
    for c in corpus.FEATURE_COLUMNS:
        metrics[f"features.{c}"] = _column_groups(rows, c)
    sources = [("attachment.csv", "attachment", ("ha", "da")),
               ("centrality.csv", "centrality", MEASURES)]
    sources += [(f"local_assortativity_{a}.csv", f"local_assortativity.{a}", ("score",)) for a in LOCAL_ATTRS]
    skipped = []
    for fname, prefix, cols in sources:
        path = ws.root / fname
        if not path.is_file():
            skipped.append(fname)
            continue
        rows = _read_csv(path)
        for c in cols:
            metrics[f"{prefix}.{c}"] = _column_groups(rows, c)
    result = {}
    for name, groups in sorted(metrics.items()):
        cmp = stats.compare_groups(groups, *GROUPS)
        pooled = [v for g in GROUPS for v in groups[g]]
        if pooled:
            rng = (min(pooled), max(pooled))
            cmp["histograms"] = {}
            for g in GROUPS:
                edges, counts = stats.histogram(groups[g], cfg.hist_bins, value_range=rng)
                cmp["histograms"][g] = {"edges": np.asarray(edges).tolist(),
                                        "counts": np.asarray(counts).tolist()}
        result[name] = cmp
    ws.json("compare", "comparisons.json", {"method": stats.KS_METHOD, "skipped_sources": skipped,
                                             "comparisons": result})


def stage_report(ws: Workspace):
    for stage in (stage_ingest, stage_label, stage_attachment, stage_features, stage_graph,
                  stage_assort, stage_compare):
        log.info("running %s", stage.__name__[len("stage_"):])
        stage(ws)
    mig = read_json(ws.artifact("migration_matrix.json"))
    att = read_json(ws.artifact("attachment_summary.json"))
    summ = read_json(ws.artifact("summary.json"))
    asr = read_json(ws.artifact("global_assortativity.json"))
    cmp = read_json(ws.artifact("comparisons.json"))
    ws.json("report", "report.json", {
        "status_counts": mig["status_counts"],
        "migration_flows": mig["filtered"],
        "top_hashtags": att["top_hashtags"],
        "attachment_means": {g: {k: att["histograms"][g][k]["mean"] for k in ("ha", "da")} for g in GROUPS},
        "graph": summ["giant_component"],
        "power_law_total_degree": summ["power_law"]["total"],
        "assortativity": {a: v["r"] for a, v in asr["categorical"].items()},
        "ks": {k: {"D": v["D"], "p": v["p"], "n1": v["n1"], "n2": v["n2"]}
               for k, v in cmp["comparisons"].items()},
        "artifacts": sorted(n for names in ws.written.values() for n in names),
    })


STAGES = {
    "synth": (stage_synth, "generate a synthetic corpus under <workdir>/data"),
    "ingest": (stage_ingest, "validate inputs and report skipped/duplicate records"),
    "label": (stage_label, "infer residence, nationality and status; migration flow matrix"),
    "attachment": (stage_attachment, "hashtag country table and home/destination attachment"),
    "features": (stage_features, "per-user profile and tweet features"),
    "graph": (stage_graph, "graph summary, centralities, power-law fit, degree histogram"),
    "assort": (stage_assort, "global and multiscale local assortativity"),
    "compare": (stage_compare, "KS comparisons of migrants vs natives over available metrics"),
    "report": (stage_report, "run ingest through compare, then aggregate the results"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="migrantnet",
        description="Migrant/native labeling, attachment and social-graph analysis pipeline.",
        epilog=EXIT_CODES + f"\n\nEnvironment variables {ENV_PREFIX}<KEY> override config-file keys.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-w", "--workdir", type=Path, default=Path("."),
                        help="directory for inputs (data/) and all artifacts (default: .)")
    parser.add_argument("-c", "--config", type=Path, help="flat 'key = value' config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("--users", help="users.jsonl path")
    parser.add_argument("--tweets", help="tweets.jsonl path")
    parser.add_argument("--edges", help="edges .jsonl or .csv path")
    parser.add_argument("--seed", type=int, help="seed for sampling and synthesis")
    parser.add_argument("--threads", type=int, help="cap on worker threads for parallel kernels")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in STAGES.items():
        sub.add_parser(name, help=help_text, description=help_text, epilog=EXIT_CODES,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def _overrides(args):
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    for key in ("users", "tweets", "edges", "seed"):
        if getattr(args, key) is not None:
            out[key] = getattr(args, key)
    return out


def _set_threads(n):
    if n is None:
        return
    import numba
    if not 1 <= n <= numba.config.NUMBA_NUM_THREADS:
        raise ValidationError(f"--threads must lie in [1, {numba.config.NUMBA_NUM_THREADS}]")
    numba.set_num_threads(n)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    # numba falls back to another threading layer on its own; the notice is noise
    warnings.filterwarnings("ignore", message=".*TBB threading layer.*")
    try:
        _set_threads(args.threads)
        config = load_config(args.config, _overrides(args))
        args.workdir.mkdir(parents=True, exist_ok=True)
        ws = Workspace(args.workdir, config)
        STAGES[args.command][0](ws)
        ws.update_manifest()
    except MigrantNetError as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "exit_code": exc.exit_code,
                                "message": str(exc)}))
        return exc.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
