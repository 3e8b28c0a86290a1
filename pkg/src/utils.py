"""
Utility functions for wikisustain.

This module contains common helpers used across the pipeline: log cleanup,
consistent error reporting, MediaWiki title handling, content digests and
deterministic JSON serialization.
"""
import hashlib
import json
import logging
import os
import traceback
import urllib.parse
from datetime import datetime, timedelta, timezone

SECONDS_PER_DAY = 86400


def cleanup_old_logs(log_dir, days=30):
    """
    Delete log files older than a certain number of days.

    Args:
        log_dir (str): Directory containing the log files
        days (int): Number of days to keep log files, older files will be deleted

    Returns:
        int: Number of files deleted
    """
    if not os.path.exists(log_dir):
        logging.warning(f"Log directory {log_dir} does not exist. Skipping cleanup.")
        return 0

    cutoff = datetime.now() - timedelta(days=days)
    count = 0

    for filename in os.listdir(log_dir):
        file_path = os.path.join(log_dir, filename)
        if os.path.isfile(file_path):
            mtime = datetime.fromtimestamp(os.path.getmtime(file_path))
            if mtime < cutoff:
                try:
                    os.remove(file_path)
                    count += 1
                    logging.info(f"Deleted old log file: {file_path}")
                except OSError as e:
                    logging.warning(f"Failed to delete log file {file_path}: {e}")

    if count > 0:
        logging.info(f"Log cleanup completed: {count} old log files deleted.")

    return count


def handle_error(error, error_type="general", with_traceback=True):
    """
    Handle and log errors consistently.

    Args:
        error (Exception): The error to handle
        error_type (str): The type of operation that failed
        with_traceback (bool): Whether to include traceback information

    Returns:
        str: The formatted error message
    """
    error_msg = f"Error in {error_type}: {str(error)}"

    if with_traceback:
        logging.error(f"{error_msg}\n{traceback.format_exc()}")
    else:
        logging.error(error_msg)

    return error_msg


def safely_execute(func, args=None, kwargs=None, error_type="operation", default_return=None):
    """
    Execute a function safely, handling any exceptions.

    Args:
        func (callable): Function to execute
        args (tuple, optional): Positional arguments to pass to the function
        kwargs (dict, optional): Keyword arguments to pass to the function
        error_type (str): The type of operation being performed (for error reporting)
        default_return: Value to return if an error occurred

    Returns:
        The return value from the function, or default_return if an error occurred
    """
    args = args or ()
    kwargs = kwargs or {}

    try:
        return func(*args, **kwargs)
    except Exception as e:
        handle_error(e, error_type, with_traceback=False)
        return default_return


def normalize_title(title):
    """
    Normalize a page title the way MediaWiki does.

    Underscores and spaces are equivalent, runs of whitespace collapse, and
    the first character is case-insensitive (stored upper-cased).

    Args:
        title (str): Raw title from a dump, list file or API response

    Returns:
        str: Canonical title
    """
    title = " ".join(title.replace("_", " ").split())
    if not title:
        return title
    return title[0].upper() + title[1:]


def title_to_filename(title, suffix=".json"):
    """Percent-encode a title into a safe, reversible file name."""
    return urllib.parse.quote(title, safe="") + suffix


def filename_to_title(filename, suffix=".json"):
    """Inverse of title_to_filename."""
    if suffix and filename.endswith(suffix):
        filename = filename[:-len(suffix)]
    return urllib.parse.unquote(filename)


def content_hash(text):
    """64-bit BLAKE2b digest of a revision's text, as 16 hex characters."""
    return hashlib.blake2b((text or "").encode("utf-8"), digest_size=8).hexdigest()


def file_sha256(path, chunk_size=1 << 20):
    """SHA-256 of a file's bytes, or None when the file does not exist."""
    if not os.path.exists(path):
        return None
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def text_sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def stable_json_dumps(obj, indent=None):
    """Serialize with sorted keys so reruns produce identical bytes."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=indent,
                      separators=(",", ":") if indent is None else (",", ": "))


def parse_iso_timestamp(value):
    """
    Convert a dump timestamp such as ``2007-05-01T12:00:00Z`` to epoch seconds.

    Args:
        value (str): ISO-8601 timestamp, UTC

    Returns:
        int: Seconds since the Unix epoch
    """
    value = value.strip()
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    parsed = datetime.fromisoformat(value)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return int(parsed.timestamp())


def format_timestamp(seconds):
    """Epoch seconds to an ISO-8601 UTC string (``2007-05-01T12:00:00Z``)."""
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def year_of(seconds):
    return datetime.fromtimestamp(seconds, tz=timezone.utc).year


def end_of_year(year):
    """Last second (Dec 31 23:59:59 UTC) of a calendar year, as epoch seconds."""
    return int(datetime(year + 1, 1, 1, tzinfo=timezone.utc).timestamp()) - 1
