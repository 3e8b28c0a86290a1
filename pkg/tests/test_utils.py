import json
import os
import time

import pytest

from src.utils import (cleanup_old_logs, content_hash, end_of_year, file_sha256, filename_to_title, normalize_title,
                       parse_iso_timestamp, safely_execute, stable_json_dumps, title_to_filename, year_of)


@pytest.mark.parametrize("raw, expected", [
    ("united_States", "United States"),
    ("  Battle   of  Hastings ", "Battle of Hastings"),
    ("iPhone", "IPhone"),
    ("", ""),
])
def test_normalize_title(raw, expected):
    assert normalize_title(raw) == expected


def test_title_filename_is_reversible_for_awkward_titles():
    title = "AC/DC: Live? 100% *real*"
    name = title_to_filename(title)
    assert "/" not in name
    assert filename_to_title(name) == title


def test_parse_iso_timestamp_is_utc():
    assert parse_iso_timestamp("1970-01-02T00:00:00Z") == 86400
    assert parse_iso_timestamp("2007-05-01T12:00:00Z") == parse_iso_timestamp("2007-05-01T12:00:00+00:00")


def test_end_of_year_is_last_second():
    boundary = end_of_year(2018)
    assert year_of(boundary) == 2018
    assert year_of(boundary + 1) == 2019


def test_stable_json_dumps_sorts_keys():
    assert stable_json_dumps({"b": 1, "a": [2, 1]}) == '{"a":[2,1],"b":1}'
    assert json.loads(stable_json_dumps({"x": "é"}, indent=1)) == {"x": "é"}


def test_content_hash_and_file_digest(tmp_path):
    assert content_hash("abc") == content_hash("abc")
    assert content_hash("abc") != content_hash("abd")
    assert len(content_hash("")) == 16
    path = tmp_path / "f.txt"
    path.write_bytes(b"hello")
    assert file_sha256(str(path)) == "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
    assert file_sha256(str(tmp_path / "missing")) is None


def test_cleanup_old_logs_keeps_recent_files(tmp_path):
    old, recent = tmp_path / "wikisustain.log.1", tmp_path / "wikisustain.log"
    old.write_text("old", encoding="utf-8")
    recent.write_text("new", encoding="utf-8")
    stale = time.time() - 40 * 86400
    os.utime(old, (stale, stale))
    assert cleanup_old_logs(str(tmp_path), days=30) == 1
    assert not old.exists() and recent.exists()
    assert cleanup_old_logs(str(tmp_path / "absent")) == 0


def test_safely_execute_returns_default_on_failure():
    assert safely_execute(int, ("7",)) == 7
    assert safely_execute(int, ("seven",), error_type="parse", default_return=-1) == -1
