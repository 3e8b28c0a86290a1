"""
Status list loading module for wikisustain.

Loads the four community status lists (current FAs, current GAs, former FAs,
delisted GAs) from newline-delimited title files or from live category
queries against the MediaWiki API. Their union is the candidate population.
"""
import logging
import os

from src.errors import StatusListError
from src.http_utils import DEFAULT_USER_AGENT, PoliteSession
from src.page_store import split_talk_title
from src.records import StatusLists
from src.utils import normalize_title

LIST_NAMES = ("current_fa", "current_ga", "former_fa", "delisted_ga")

# Category sources for a live fetch; former/delisted categories sit on talk pages
DEFAULT_CATEGORIES = {
    "current_fa": {"category": "Category:Featured articles", "namespace": 0},
    "current_ga": {"category": "Category:Good articles", "namespace": 0},
    "former_fa": {"category": "Category:Wikipedia former featured articles", "namespace": 1},
    "delisted_ga": {"category": "Category:Delisted good articles", "namespace": 1},
}


def read_title_file(path):
    """
    Read a newline-delimited UTF-8 title list.

    Args:
        path (str): Path to the list file

    Returns:
        frozenset: Normalized, de-duplicated titles

    Raises:
        StatusListError: If the file cannot be read
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            titles = {normalize_title(line) for line in f}
    except (OSError, UnicodeDecodeError) as e:
        raise StatusListError(f"Cannot read status list {path}: {e}") from e
    titles.discard("")
    if not titles:
        logging.warning(f"Status list {path} is empty")
    return frozenset(titles)


def fetch_status_list(category, namespace, session, base_url):
    """
    Fetch all members of a category through ``list=categorymembers``.

    Follows ``cmcontinue`` until the listing is exhausted. Talk-page members
    are mapped back to their article titles.

    Args:
        category (str): Category title, e.g. "Category:Good articles"
        namespace (int): Namespace of the member pages
        session (PoliteSession): Rate-limited HTTP session
        base_url (str): MediaWiki ``api.php`` endpoint

    Returns:
        frozenset: Normalized article titles
    """
    params = {
        "action": "query",
        "list": "categorymembers",
        "cmtitle": category,
        "cmnamespace": namespace,
        "cmlimit": "max",
        "format": "json",
    }
    titles = set()
    page = 0
    while True:
        page += 1
        response = session.get(base_url, params=params)
        if response is None or response.status_code != 200:
            status = None if response is None else response.status_code
            raise StatusListError(f"Category query for {category} failed on page {page} (status {status})")
        data = response.json()
        for member in data.get("query", {}).get("categorymembers", []):
            title, _ = split_talk_title(member["title"])
            titles.add(normalize_title(title))
        cont = data.get("continue", {}).get("cmcontinue")
        if not cont:
            break
        params["cmcontinue"] = cont
        logging.debug(f"Fetched page {page} of {category}, continuing")

    logging.info(f"Fetched {len(titles)} titles from {category} ({page} pages)")
    if not titles:
        logging.warning(f"Category {category} returned no members")
    return frozenset(titles)


def load_status_lists(list_config, snapshot_date=None, api_config=None, session=None):
    """
    Load the four status lists.

    Each entry of ``list_config`` is either a file path string or a mapping
    ``{"category": ..., "namespace": ...}`` for a live query.

    Args:
        list_config (dict): List name -> path or category spec
        snapshot_date (str, optional): Date the lists describe
        api_config (dict, optional): ``base_url``, ``min_interval_seconds``, ``user_agent``
        session (PoliteSession, optional): Session to reuse for live queries

    Returns:
        StatusLists: The four sets plus the snapshot date
    """
    api_config = api_config or {}
    loaded = {}
    for name in LIST_NAMES:
        source = list_config.get(name)
        if source is None:
            logging.warning(f"Status list '{name}' not configured; using an empty set")
            loaded[name] = frozenset()
        elif isinstance(source, str):
            if not os.path.exists(source):
                raise StatusListError(f"Status list '{name}' not found: {source}")
            loaded[name] = read_title_file(source)
        else:
            if session is None:
                session = PoliteSession(
                    min_interval=api_config.get("min_interval_seconds", 1.0),
                    user_agent=api_config.get("user_agent") or DEFAULT_USER_AGENT,
                )
            loaded[name] = fetch_status_list(source["category"], source.get("namespace", 0),
                                             session, api_config["base_url"])
        logging.info(f"Status list '{name}': {len(loaded[name])} titles")

    lists = StatusLists(snapshot_date=snapshot_date, **loaded)
    logging.info(f"Candidate population: {len(lists.population)} titles")
    return lists
