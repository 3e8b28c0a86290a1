"""
Pipeline stages for wikisustain.

ingest -> label -> featurize -> train -> evaluate -> report, each reading
the previous stage's artifacts from the workdir. A stage is skipped when
its config slice and input files hash the same as on its last successful
run and its outputs are untouched.
"""
import bz2
import gzip
import json
import logging
import os
import shutil
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import pandas as pd

from src.analysis import at_risk_report, dataset_stats, fp_review_analysis, heatmap, promotion_path_gap
from src.dump_parser import parse_dump_stream, parse_jsonl_stream
from src.errors import ConfigError, InputMissingError, StageError, WikisustainError
from src.evaluation import EvalProtocol, ablation_run, corpus_growth
from src.experience import CorpusIndex, corpus_hash
from src.feature_matrix import FeatureMatrix, assemble_matrix, column_groups, featurize_article, leakage_audit
from src.gbt import GbtModel, train_gbt
from src.labels import apply_censoring, build_timeline, read_timelines, review_count, write_label_diagnostics, \
    write_timelines
from src.page_store import PageStore, split_talk_title
from src.records import FA, PageHistory, StatusLists
from src.report_formatter import (ablation_frame, format_summary, heatmap_filename, metrics_frame, oof_frame,
                                  write_csv, write_manifest)
from src.scorers import make_binding
from src.status_lists import LIST_NAMES, load_status_lists
from src.status_monitor import StageMonitor
from src.topic_features import build_registry, load_registry, read_registry_entries, write_registry
from src.tree_shap import global_importance
from src.utils import SECONDS_PER_DAY, end_of_year, file_sha256, handle_error, parse_iso_timestamp, stable_json_dumps
from src.window import window_history

STAGES = ("ingest", "label", "featurize", "train", "evaluate", "report")
JSONL_SUFFIXES = (".jsonl", ".ndjson")


def open_dump(path):
    """Binary stream of a dump; ``.bz2`` and ``.gz`` files are decompressed on the fly."""
    if path.endswith(".bz2"):
        return bz2.open(path, "rb")
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def is_jsonl(path):
    base = path[:-4] if path.endswith(".bz2") else path[:-3] if path.endswith(".gz") else path
    return base.endswith(JSONL_SUFFIXES)


def _lists_to_dict(lists):
    return {**{name: sorted(getattr(lists, name)) for name in LIST_NAMES}, "snapshot_date": lists.snapshot_date}


def _lists_from_dict(data):
    return StatusLists(snapshot_date=data.get("snapshot_date"),
                       **{name: frozenset(data.get(name, [])) for name in LIST_NAMES})


class Pipeline:
    """Runs stages against one validated configuration."""

    def __init__(self, config):
        self.config = config
        self.use_case = config["use_case"]
        self.workdir = config["paths"]["workdir"]
        self.case_dir = os.path.join(self.workdir, self.use_case.lower())
        self.report_dir = os.path.join(self.case_dir, "report")
        self.workers = config["settings"]["workers"]
        self.seed = config["seed"]
        os.makedirs(self.case_dir, exist_ok=True)
        self.monitor = StageMonitor(self.workdir)

    def path(self, name):
        return os.path.join(self.workdir, name)

    def case_path(self, name):
        return os.path.join(self.case_dir, name)

    def report_path(self, name):
        return os.path.join(self.report_dir, name)

    # stage bookkeeping

    def _stage_key(self, stage):
        return stage if stage in ("ingest", "label") else f"{stage}-{self.use_case}"

    def _inputs(self, stage):
        """(config slice, input files) that decide whether a stage must rerun."""
        c = self.config
        pages_manifest = self.path("pages_manifest.json")
        timelines = self.path("timelines.jsonl")
        matrix = self.case_path("matrix.csv")
        model = self.case_path("model.json")
        if stage == "ingest":
            lists = c["paths"]["lists"]
            files = [c["paths"]["dump"]] + [p for p in lists.values() if isinstance(p, str)]
            return {"paths": c["paths"], "snapshot_date": c["snapshot_date"]}, files
        if stage == "label":
            return ({"labels": c["labels"], "censoring": c["censoring"], "snapshot_date": c["snapshot_date"]},
                    [pages_manifest, self.path("lists.json")])
        if stage == "featurize":
            files = [timelines, pages_manifest, c["paths"]["registry"]]
            if c["paths"]["scores_sidecar"]:
                files.append(c["paths"]["scores_sidecar"])
            return ({"use_case": self.use_case, "registry": c["registry"], "scorer": c["scorer"], "seed": self.seed,
                     "audit": c["settings"]["leakage_audit_sample"]}, files)
        if stage == "train":
            return ({"model": c["model"], "seed": self.seed, "include_flags": c["evaluation"]["include_flags"]},
                    [matrix, self.case_path("matrix.meta.json")])
        if stage == "evaluate":
            return ({"model": c["model"], "evaluation": c["evaluation"], "seed": self.seed},
                    [matrix, self.case_path("matrix.meta.json"), model])
        return ({"evaluation": c["evaluation"]},
                [model, timelines, self.case_path("at_risk_matrix.csv"), self.report_path("oof_predictions.csv")])

    def run(self, stage):
        """Run one stage (or "all") as one counted run; returns the list of stages actually executed."""
        if stage != "all" and stage not in STAGES:
            raise ConfigError("subcommand", f"unknown stage {stage!r}")
        runs = self.monitor.record_run_start()
        logging.info(f"Run {runs}: {stage} ({self.use_case})")
        if stage == "all":
            executed = []
            for name in STAGES:
                executed.extend(self._run_stage(name))
            return executed
        return self._run_stage(stage)

    def _run_stage(self, stage):
        key = self._stage_key(stage)
        config_part, files = self._inputs(stage)
        input_hash = self.monitor.input_hash(config_part, files)
        if self.monitor.is_current(key, input_hash):
            logging.info(f"Stage {key} up to date; skipped")
            return []

        logging.info(f"Starting stage {key}...")
        started = time.monotonic()
        try:
            outputs = getattr(self, f"_{stage}")()
        except ConfigError:
            raise
        except (WikisustainError, OSError, ValueError) as e:
            error_msg = handle_error(e, f"stage_{stage}", with_traceback=not isinstance(e, WikisustainError))
            self.monitor.record_error(key, error_msg)
            raise StageError(stage, str(e)) from e
        self.monitor.record_stage(key, input_hash, outputs)
        logging.info(f"Stage {key} finished in {time.monotonic() - started:.1f}s")
        return [stage]

    # stages

    def _ingest(self):
        dump = self.config["paths"]["dump"]
        if not dump:
            raise ConfigError("paths.dump", "no dump configured")
        if not os.path.exists(dump):
            raise InputMissingError("paths.dump", f"dump not found: {dump}")
        for name, source in self.config["paths"]["lists"].items():
            if isinstance(source, str) and not os.path.exists(source):
                raise InputMissingError(f"paths.lists.{name}", f"status list not found: {source}")

        lists = load_status_lists(self.config["paths"]["lists"], self.config["snapshot_date"], self.config["api"])
        population = lists.population
        pages_dir = self.path("pages")
        if os.path.isdir(pages_dir):
            shutil.rmtree(pages_dir)
        store = PageStore(pages_dir)

        kept = skipped = 0
        with open_dump(dump) as stream:
            fragments = parse_jsonl_stream(stream) if is_jsonl(dump) else parse_dump_stream(stream)
            for fragment in fragments:
                if population and split_talk_title(fragment.title)[0] not in population:
                    skipped += 1
                    continue
                store.write_fragment(fragment)
                kept += 1
        store.finalize()
        logging.info(f"Ingested {kept} page fragments ({skipped} outside the population) "
                     f"into {len(store.titles())} articles")

        with open(self.path("lists.json"), "w", encoding="utf-8") as f:
            f.write(stable_json_dumps(_lists_to_dict(lists), indent=1) + "\n")
        with open(self.path("pages_manifest.json"), "w", encoding="utf-8") as f:
            manifest = {title: store.path_for(title) for title in store.titles()}
            f.write(stable_json_dumps({t: file_sha256(p) for t, p in manifest.items()}, indent=1) + "\n")
        return [self.path("lists.json"), self.path("pages_manifest.json")]

    def _label(self):
        with open(self.path("lists.json"), "r", encoding="utf-8") as f:
            lists = _lists_from_dict(json.load(f))
        store = PageStore(self.path("pages"))
        labels = self.config["labels"]
        horizon = None
        if self.config["snapshot_date"]:
            horizon = parse_iso_timestamp(self.config["snapshot_date"])

        titles = sorted(set(store.titles()) | set(lists.population))
        timelines = []
        for title in titles:
            page = store.load(title) if store.exists(title) else PageHistory(title=title)
            timelines.append(build_timeline(
                title, page, lists, tuple(labels["fa_templates"]), tuple(labels["ga_templates"]),
                labels["merge_window_days"], labels["min_revisions"], labels["min_days"] * SECONDS_PER_DAY,
                horizon=horizon,
            ))
        censoring = self.config["censoring"]
        timelines = apply_censoring(timelines, censoring["cutoff_fa"], censoring["cutoff_ga"])

        write_timelines(self.path("timelines.jsonl"), timelines)
        inconsistent = write_label_diagnostics(self.path("label_diagnostics.csv"), timelines)
        logging.info(f"Labeled {len(timelines)} articles; {inconsistent} inconsistent")
        return [self.path("timelines.jsonl"), self.path("label_diagnostics.csv")]

    def _registry(self, store, timelines):
        settings = self.config["registry"]
        texts = []
        for timeline in timelines:
            if timeline.t_prom(self.use_case) is None or not store.exists(timeline.title):
                continue
            w = window_history(store.load(timeline.title), timeline, self.use_case)
            texts.append(w.latest_talk_text)
        entries = build_registry(texts, read_registry_entries(self.config["paths"]["registry"]),
                                 settings["size"], tuple(settings["removed"]))
        path = self.case_path("registry.json")
        write_registry(path, entries)
        return load_registry(path, settings["size"] - len(settings["removed"])), path

    def _featurize(self):
        store = PageStore(self.path("pages"))
        timelines = read_timelines(self.path("timelines.jsonl"))
        by_title = {t.title: t for t in timelines}
        uc = self.use_case

        registry, registry_path = self._registry(store, timelines)
        population = [t for t in timelines if store.exists(t.title) and t.t_birth is not None]
        index = CorpusIndex.load_or_build(self.path("corpus_index"), store, population, workers=self.workers,
                                          run_ceiling=self.config["experience"]["run_ceiling"])
        binding = make_binding(self.config["scorer"], self.config["paths"]["scores_sidecar"])

        modeled = sorted(t.title for t in timelines if t.is_modeled(uc) and store.exists(t.title))
        at_risk = sorted(t.title for t in timelines
                         if t.censored(uc) and t.t_prom(uc) is not None and store.exists(t.title))

        def featurize(title):
            diagnostics = Counter()
            blocks = featurize_article(store.load(title), by_title[title], uc, registry, index, binding, diagnostics)
            return title, blocks, diagnostics

        diagnostics = Counter(unrated=0, unregistered=0)
        outputs = {}
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for title, blocks, counts in pool.map(featurize, modeled + at_risk):
                outputs[title] = blocks
                diagnostics.update(counts)
        logging.info(f"Featurized {len(modeled)} modeled and {len(at_risk)} at-risk articles")

        groups = column_groups(uc, registry)
        metadata = {
            "corpus_hash": corpus_hash([t.title for t in population], population),
            "scorer": binding.metadata(),
            "seed": self.seed,
            "topic_diagnostics": dict(sorted(diagnostics.items())),
            "groups": {name: list(columns) for name, columns in groups.items()},
        }
        matrix = assemble_matrix(timelines, outputs, uc, registry, titles=modeled, metadata=metadata)
        at_risk_matrix = assemble_matrix(timelines, outputs, uc, registry, titles=at_risk, metadata=metadata)

        sample = self.config["settings"]["leakage_audit_sample"]
        if sample:
            leakage_audit(store, [by_title[t] for t in modeled], uc,
                          lambda page, timeline: featurize_article(page, timeline, uc, registry, index, binding),
                          sample=sample, seed=self.seed)

        matrix.write(self.case_path("matrix.csv"))
        at_risk_matrix.write(self.case_path("at_risk_matrix.csv"))
        return [self.case_path(name) for name in ("matrix.csv", "matrix.meta.json", "at_risk_matrix.csv",
                                                  "at_risk_matrix.meta.json")] + [registry_path]

    def _train(self):
        matrix = FeatureMatrix.read(self.case_path("matrix.csv"))
        x, columns = matrix.select(matrix.columns, include_flags=self.config["evaluation"]["include_flags"])
        model = train_gbt(x, matrix.labels, columns, self.config["model"], seed=self.seed)
        model.save(self.case_path("model.json"))
        logging.info(f"Trained {len(model.trees)} trees on {matrix.n_rows} articles x {len(columns)} columns")
        return [self.case_path("model.json")]

    def protocol(self):
        evaluation = self.config["evaluation"]
        return EvalProtocol(
            bootstrap_iterations=evaluation["bootstrap_iterations"],
            folds=evaluation["folds"],
            threshold=float(evaluation["threshold"]),
            k_list=tuple(evaluation["k_list"]),
            seed=self.seed,
            include_flags=evaluation["include_flags"],
            workers=self.workers,
            model_params=dict(self.config["model"]),
        )

    def _evaluate(self):
        evaluation = self.config["evaluation"]
        matrix = FeatureMatrix.read(self.case_path("matrix.csv"))
        model = GbtModel.load(self.case_path("model.json"))
        protocol = self.protocol()
        groups = matrix.metadata["groups"]
        os.makedirs(self.report_dir, exist_ok=True)
        written = []

        results = ablation_run(matrix, groups, protocol)
        logging.info(format_summary(self.use_case, results))
        written.append(write_csv(metrics_frame(results["All"]), self.report_path("metrics.csv")))
        written.append(write_csv(ablation_frame(results), self.report_path("ablation.csv")))
        written.append(write_csv(oof_frame(matrix.articles, matrix.labels, results["All"]["cv"]),
                                 self.report_path("oof_predictions.csv")))

        for spec in evaluation["heatmaps"]:
            if spec["x"] not in matrix.columns or spec["y"] not in matrix.columns:
                logging.warning(f"Heatmap {spec['x']} x {spec['y']}: unknown column, skipped")
                continue
            x_index, y_index = matrix.column_index([spec["x"], spec["y"]])
            grid = heatmap(matrix.features[:, x_index], matrix.features[:, y_index], matrix.labels,
                           spec.get("bins", 5), spec.get("bins", 5), evaluation["min_count"],
                           spec.get("mode", "quantile"), spec["x"], spec["y"])
            written.append(write_csv(grid.to_frame(), self.report_path(heatmap_filename(spec["x"], spec["y"]))))

        frame = matrix.to_frame()
        importance = global_importance(model, frame[list(model.columns)].to_numpy(), evaluation["shap_top_k"])
        written.append(write_csv(importance, self.report_path("shap_top.csv")))

        growth = corpus_growth(matrix, protocol, columns=groups["All"], years=evaluation["corpus_growth_years"],
                               min_positives=evaluation["min_positives"])
        written.append(write_csv(growth, self.report_path("corpus_growth.csv")))
        written.append(write_csv(dataset_stats(matrix), self.report_path("dataset_stats.csv")))
        if self.use_case == FA:
            written.append(write_csv(promotion_path_gap(matrix), self.report_path("promotion_path.csv")))

        self._manifest(matrix)
        return written

    def _report(self):
        evaluation = self.config["evaluation"]
        timelines = {t.title: t for t in read_timelines(self.path("timelines.jsonl"))}
        oof = pd.read_csv(self.report_path("oof_predictions.csv"), dtype={"article": str}, keep_default_na=False)
        articles = list(oof["article"])
        reviews = {a: review_count(timelines[a], self.use_case) for a in articles if a in timelines}
        table, ranked = fp_review_analysis(articles, oof["probability"].to_numpy(), oof["label"].to_numpy(),
                                           reviews, evaluation["threshold"], evaluation["top_n"])
        written = [write_csv(table, self.report_path("fp_reviews.csv")),
                   write_csv(ranked, self.report_path("fp_ranked.csv"))]

        model = GbtModel.load(self.case_path("model.json"))
        at_risk = FeatureMatrix.read(self.case_path("at_risk_matrix.csv"))
        written.append(write_csv(at_risk_report(model, at_risk, evaluation["top_n"]), self.report_path("at_risk.csv")))

        matrix = FeatureMatrix.read(self.case_path("matrix.csv"))
        written.append(self._manifest(matrix))
        return written

    def _manifest(self, matrix):
        files = [os.path.join(self.report_dir, name) for name in sorted(os.listdir(self.report_dir))
                 if name.endswith(".csv")]
        return write_manifest(self.report_dir, self.config, matrix.metadata.get("corpus_hash"), files,
                              extra={"scorer": matrix.metadata.get("scorer"),
                                     "censoring_boundary": {
                                         "FA": end_of_year(self.config["censoring"]["cutoff_fa"]),
                                         "GA": end_of_year(self.config["censoring"]["cutoff_ga"])}})
