"""
Stage bookkeeping for wikisustain.

Tracks each pipeline stage's input hash, output hashes, outcome and recent
errors in ``<workdir>/status.json``. A stage is skipped when its input hash
matches the last successful run and its recorded outputs still hash the same.
"""
import json
import logging
import os
from datetime import datetime, timezone

from src.utils import file_sha256, stable_json_dumps, text_sha256

STATUS_FILE = "status.json"
MAX_ERRORS = 50


class StageMonitor:
    def __init__(self, workdir):
        self.path = os.path.join(workdir, STATUS_FILE)
        self.status = {"stages": {}, "errors": [], "total_runs": 0}
        self.load_status()

    def load_status(self):
        """Load status from file"""
        if os.path.exists(self.path):
            try:
                with open(self.path, "r", encoding="utf-8") as f:
                    self.status = json.load(f)
            except (OSError, ValueError) as e:
                logging.error(f"Error loading status file: {e}")

    def save_status(self):
        """Save status to file"""
        try:
            os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
            with open(self.path, "w", encoding="utf-8") as f:
                f.write(stable_json_dumps(self.status, indent=2) + "\n")
        except OSError as e:
            logging.error(f"Error saving status file: {e}")

    @staticmethod
    def input_hash(config_part, input_files):
        """Digest of a stage's config slice and the contents of its input files."""
        files = {p: file_sha256(p) if os.path.isfile(p) else None for p in sorted(f for f in input_files if f)}
        return text_sha256(stable_json_dumps({"config": config_part, "files": files}))

    def is_current(self, stage, input_hash):
        """True when the last successful run had this input hash and its outputs are unchanged."""
        record = self.status["stages"].get(stage)
        if not record or record.get("outcome") != "success" or record.get("input_hash") != input_hash:
            return False
        for path, digest in record.get("outputs", {}).items():
            if not os.path.isfile(path) or file_sha256(path) != digest:
                return False
        return True

    def record_run_start(self):
        self.status["total_runs"] = self.status.get("total_runs", 0) + 1
        self.save_status()
        return self.status["total_runs"]

    def record_stage(self, stage, input_hash, outputs, outcome="success"):
        self.status["stages"][stage] = {
            "input_hash": input_hash,
            "outputs": {p: file_sha256(p) for p in sorted(outputs) if os.path.isfile(p)},
            "outcome": outcome,
        }
        self.save_status()

    def record_error(self, stage, error_msg):
        """Record a stage failure; only the 50 most recent errors are kept."""
        entry = {"timestamp": datetime.now(timezone.utc).isoformat(), "stage": stage, "error": error_msg}
        self.status["errors"] = ([entry] + self.status.get("errors", []))[:MAX_ERRORS]
        record = self.status["stages"].setdefault(stage, {})
        record["outcome"] = "failed"
        self.save_status()
