"""
HTTP utility functions for wikisustain.

This module provides HTTP request handling with automatic retry logic,
timeout management and a polite per-session request rate, used when the
status lists are fetched live from the MediaWiki API.
"""
import logging
import time

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

DEFAULT_USER_AGENT = "wikisustain/1.0 (research pipeline; MediaWiki API list queries)"


def create_retry_session(
    retries=3,
    backoff_factor=0.3,
    status_forcelist=(429, 500, 502, 503, 504),
    session=None
):
    """
    Create a requests Session with retry logic

    Parameters:
    - retries: Number of retry attempts
    - backoff_factor: Factor to apply between retry attempts (wait will be: {backoff factor} * (2 ** ({number of total retries} - 1))
    - status_forcelist: HTTP status codes that should trigger a retry
    - session: Existing session to add retry logic to

    Returns:
    - requests.Session with retry logic
    """
    session = session or requests.Session()
    retry = Retry(
        total=retries,
        read=retries,
        connect=retries,
        backoff_factor=backoff_factor,
        status_forcelist=status_forcelist,
        respect_retry_after_header=True,
    )
    adapter = HTTPAdapter(max_retries=retry)
    session.mount('http://', adapter)
    session.mount('https://', adapter)
    return session


class PoliteSession:
    """Retrying session that waits at least ``min_interval`` seconds between requests."""

    def __init__(self, min_interval=1.0, user_agent=DEFAULT_USER_AGENT, retries=3,
                 session=None, clock=time.monotonic, sleep=time.sleep):
        self.min_interval = min_interval
        self.session = create_retry_session(retries=retries, session=session)
        self.session.headers.update({"User-Agent": user_agent})
        self._clock = clock
        self._sleep = sleep
        self._last_request = None

    def get(self, url, params=None, timeout=30):
        """
        Rate-limited GET.

        Returns:
        - Response object or None if all attempts failed
        """
        if self._last_request is not None:
            wait = self.min_interval - (self._clock() - self._last_request)
            if wait > 0:
                logging.debug(f"Waiting {wait:.2f} seconds before next API request...")
                self._sleep(wait)
        self._last_request = self._clock()
        try:
            return self.session.get(url, params=params, timeout=timeout)
        except requests.exceptions.RequestException as e:
            logging.error(f"Failed request to {url}: {e}")
            return None
