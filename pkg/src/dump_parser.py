"""
MediaWiki dump parsing module for wikisustain.

Streams ``pages-meta-history`` XML (or the JSON-lines equivalent) into
per-page revision histories. Only the page currently being read is held in
memory, so peak memory follows the largest single page history rather than
the dump size.
"""
import json
import logging

from lxml import etree

from src.errors import DumpParseError
from src.records import ARTICLE_NAMESPACE, TALK_NAMESPACE, Editor, PageHistory, RevisionRecord, sort_revisions
from src.utils import parse_iso_timestamp

READ_SIZE = 64 * 1024
KEPT_NAMESPACES = frozenset({ARTICLE_NAMESPACE, TALK_NAMESPACE})


def _local(tag):
    # Dump elements carry the export-0.x namespace; compare on local names only
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _child(element, name):
    for child in element:
        if _local(child.tag) == name:
            return child
    return None


def _child_text(element, name):
    child = _child(element, name)
    if child is None or child.text is None:
        return None
    return child.text


def _is_deleted(element):
    return element is not None and element.get("deleted") is not None


def _parse_contributor(element):
    if element is None or _is_deleted(element):
        return Editor.unknown()
    username = _child_text(element, "username")
    if username:
        return Editor.registered(username)
    ip = _child_text(element, "ip")
    if ip:
        # Old dumps put labels like "Conversion script" in <ip>; those are not addresses
        return Editor.from_name(ip.strip())
    return Editor.unknown()


def _build_fragment(title, namespace, revisions):
    revisions = sort_revisions(revisions)
    if namespace == TALK_NAMESPACE:
        return PageHistory(title=title, talk_revisions=revisions)
    return PageHistory(title=title, article_revisions=revisions)


class _PageState:
    """Fields of the page currently being streamed."""

    def __init__(self):
        self.title = None
        self.namespace = None
        self.page_id = None
        self.revisions = []


def _revision_from_element(element, page):
    timestamp = _child_text(element, "timestamp")
    revision_id = _child_text(element, "id")
    if not timestamp or not revision_id:
        logging.warning(f"Skipping revision without timestamp or id on page '{page.title}' (id={revision_id})")
        return None

    text_element = _child(element, "text")
    suppressed = _is_deleted(text_element)
    text = "" if suppressed or text_element is None else (text_element.text or "")

    comment_element = _child(element, "comment")
    comment = "" if comment_element is None or _is_deleted(comment_element) else (comment_element.text or "")

    parent = _child_text(element, "parentid")
    return RevisionRecord.create(
        page_id=page.page_id or 0,
        title=page.title,
        namespace=page.namespace,
        revision_id=int(revision_id),
        parent_revision_id=int(parent) if parent else None,
        timestamp=parse_iso_timestamp(timestamp),
        editor=_parse_contributor(_child(element, "contributor")),
        text=text,
        comment=comment,
        suppressed=suppressed,
    )


def _release(element):
    # Free the subtree and any already-processed siblings held by the root
    element.clear()
    parent = element.getparent()
    if parent is not None:
        while element.getprevious() is not None:
            del parent[0]


def parse_dump_stream(source, namespaces=KEPT_NAMESPACES, read_size=READ_SIZE):
    """
    Stream a MediaWiki XML history dump into PageHistory fragments.

    Each yielded value covers one dump page: namespace-0 pages fill
    ``article_revisions``, namespace-1 pages fill ``talk_revisions`` and keep
    their ``Talk:`` title. Pair them with pair_article_talk or PageStore.

    Args:
        source: Binary file-like object with uncompressed dump XML
        namespaces (set): Namespaces to keep
        read_size (int): Bytes fed to the parser per step

    Yields:
        PageHistory: One fragment per page, revisions in canonical order

    Raises:
        DumpParseError: Malformed XML, with the byte offset reached
    """
    parser = etree.XMLPullParser(events=("end",), huge_tree=True, resolve_entities=False)
    page = _PageState()
    offset = 0

    def drain():
        nonlocal page
        for _, element in parser.read_events():
            name = _local(element.tag)
            parent = element.getparent()
            parent_name = _local(parent.tag) if parent is not None else ""

            if parent_name == "page":
                if name == "title":
                    page.title = element.text or ""
                elif name == "ns":
                    page.namespace = int(element.text or 0)
                elif name == "id":
                    page.page_id = int(element.text or 0)
                elif name == "revision":
                    if page.namespace in namespaces:
                        revision = _revision_from_element(element, page)
                        if revision is not None:
                            page.revisions.append(revision)
                    _release(element)
            elif name == "page":
                if page.namespace in namespaces and page.title:
                    yield _build_fragment(page.title, page.namespace, page.revisions)
                page = _PageState()
                _release(element)
            elif name == "siteinfo":
                _release(element)

    try:
        while True:
            chunk = source.read(read_size)
            if not chunk:
                break
            offset += len(chunk)
            parser.feed(chunk)
            yield from drain()
        parser.close()
        yield from drain()
    except etree.XMLSyntaxError as e:
        line, column = e.position if e.position else (None, None)
        raise DumpParseError(f"Malformed dump XML: {e.msg}", offset, line, column) from e


def _editor_from_json(value):
    if isinstance(value, dict):
        return Editor.from_dict(value)
    return Editor.from_name(str(value))


def revision_from_json(data):
    """Build a RevisionRecord from one JSON-lines object (content_hash recomputed)."""
    return RevisionRecord.create(
        page_id=int(data.get("page_id", 0)),
        title=data["title"],
        namespace=int(data.get("namespace", ARTICLE_NAMESPACE)),
        revision_id=int(data["revision_id"]),
        parent_revision_id=data.get("parent_revision_id"),
        timestamp=data["timestamp"] if isinstance(data["timestamp"], int) else parse_iso_timestamp(str(data["timestamp"])),
        editor=_editor_from_json(data["editor"]),
        text=data.get("text", ""),
        comment=data.get("comment", ""),
        suppressed=bool(data.get("suppressed", False)),
    )


def parse_jsonl_stream(lines, namespaces=KEPT_NAMESPACES):
    """
    Stream JSON-lines revisions (one RevisionRecord per line) into fragments.

    Consecutive lines of the same (namespace, title) form one fragment; a page
    that reappears later yields another fragment for the page store to merge.

    Args:
        lines: Iterable of str or bytes lines
        namespaces (set): Namespaces to keep

    Yields:
        PageHistory: Fragments in input order
    """
    current_key = None
    revisions = []
    for number, line in enumerate(lines, 1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        if data.get("timestamp") in (None, ""):
            logging.warning(f"Skipping JSON-lines revision without timestamp at line {number}")
            continue
        revision = revision_from_json(data)
        if revision.namespace not in namespaces:
            continue
        key = (revision.namespace, revision.title)
        if key != current_key and revisions:
            yield _build_fragment(current_key[1], current_key[0], revisions)
            revisions = []
        current_key = key
        revisions.append(revision)
    if revisions:
        yield _build_fragment(current_key[1], current_key[0], revisions)
