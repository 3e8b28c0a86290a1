import pytest
import requests

from src.errors import StatusListError
from src.http_utils import PoliteSession
from src.status_lists import fetch_status_list, load_status_lists, read_title_file


class FakeResponse:
    def __init__(self, payload, status_code=200):
        self.payload = payload
        self.status_code = status_code

    def json(self):
        return self.payload


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def get(self, url, params=None):
        self.calls.append(dict(params))
        return self.responses.pop(0)


def members(*titles, cont=None):
    payload = {"query": {"categorymembers": [{"title": t} for t in titles]}}
    if cont:
        payload["continue"] = {"cmcontinue": cont}
    return FakeResponse(payload)


def test_read_title_file_normalizes(tmp_path):
    path = tmp_path / "fa.txt"
    path.write_text("moon\nMoon\nHalley's_Comet\n\n  \n", encoding="utf-8")
    assert read_title_file(str(path)) == frozenset({"Moon", "Halley's Comet"})


def test_read_title_file_missing(tmp_path):
    with pytest.raises(StatusListError):
        read_title_file(str(tmp_path / "nope.txt"))


def test_fetch_follows_continuation_and_strips_talk_prefix():
    session = FakeSession([members("Talk:Moon", cont="page2"), members("Talk:sun")])
    titles = fetch_status_list("Category:Wikipedia former featured articles", 1, session, "https://example/api.php")
    assert titles == frozenset({"Moon", "Sun"})
    assert "cmcontinue" not in session.calls[0]
    assert session.calls[1]["cmcontinue"] == "page2"


def test_fetch_failure_names_the_page():
    session = FakeSession([members("A", cont="x"), FakeResponse({}, status_code=503)])
    with pytest.raises(StatusListError, match="page 2"):
        fetch_status_list("Category:Good articles", 0, session, "https://example/api.php")


def test_load_mixes_files_and_categories(tmp_path, caplog):
    fa = tmp_path / "fa.txt"
    fa.write_text("Moon\n", encoding="utf-8")
    session = FakeSession([members("Sun")])
    lists = load_status_lists(
        {"current_fa": str(fa), "current_ga": {"category": "Category:Good articles"}},
        snapshot_date="2022-01-01", api_config={"base_url": "https://example/api.php"}, session=session,
    )
    assert lists.current_fa == frozenset({"Moon"})
    assert lists.current_ga == frozenset({"Sun"})
    assert lists.former_fa == frozenset()
    assert lists.population == frozenset({"Moon", "Sun"})
    assert lists.snapshot_date == "2022-01-01"
    assert "former_fa" in caplog.text


def test_load_missing_file(tmp_path):
    with pytest.raises(StatusListError, match="delisted_ga"):
        load_status_lists({"delisted_ga": str(tmp_path / "gone.txt")})


def test_polite_session_waits_between_requests(monkeypatch):
    now = [100.0]
    waits = []

    def sleep(seconds):
        waits.append(seconds)
        now[0] += seconds

    session = PoliteSession(min_interval=1.0, clock=lambda: now[0], sleep=sleep)
    monkeypatch.setattr(session.session, "get", lambda url, params=None, timeout=30: FakeResponse({}))
    session.get("https://example/api.php")
    now[0] += 0.25
    session.get("https://example/api.php")
    assert waits == [pytest.approx(0.75)]
    assert session.session.headers["User-Agent"].startswith("wikisustain/")


def test_polite_session_swallows_request_errors(monkeypatch):
    session = PoliteSession(min_interval=0.0)

    def boom(url, params=None, timeout=30):
        raise requests.exceptions.ConnectionError("down")

    monkeypatch.setattr(session.session, "get", boom)
    assert session.get("https://example/api.php") is None
