"""
Talk-page discussion parser for wikisustain.

Sections of a talk revision become threads; signed lines close comments.
A signature is a user link (User:, User talk: or Special:Contributions/)
followed by a ``HH:MM, D Month YYYY (UTC)`` timestamp.
"""
import dataclasses
import logging
import re
from datetime import datetime, timezone

import mwparserfromhell

from src.records import Comment, Editor

SIGNATURE_TIME = re.compile(
    r"(?P<time>\d{1,2}:\d{2}),?\s+(?P<day>\d{1,2})\s+(?P<month>[A-Z][a-z]+)\s+(?P<year>\d{4})\s*\(UTC\)")
USER_LINK = re.compile(
    r"\[\[\s*(?:User(?:[ _]talk)?\s*:\s*(?P<user>[^\]\|#/]+)|Special\s*:\s*Contributions\s*/\s*(?P<ip>[^\]\|]+))",
    re.IGNORECASE)
INDENT = re.compile(r"^[:*#]+")
OUTDENT = re.compile(r"^\{\{\s*(?:outdent|od)\d?\s*(?:\|[^}]*)?\}\}", re.IGNORECASE)


def parse_signature_time(match):
    text = f"{match.group('time')}, {match.group('day')} {match.group('month')} {match.group('year')}"
    try:
        parsed = datetime.strptime(text, "%H:%M, %d %B %Y")
    except ValueError:
        return None
    return int(parsed.replace(tzinfo=timezone.utc).timestamp())


def find_signature(line):
    """
    Signer and time of a signed line, or None.

    The last user link before the last timestamp on the line is the signer.
    """
    times = list(SIGNATURE_TIME.finditer(line))
    if not times:
        return None
    stamp = times[-1]
    links = [m for m in USER_LINK.finditer(line, 0, stamp.start())]
    if not links:
        return None
    link = links[-1]
    name = (link.group("user") or link.group("ip") or "").strip().replace("_", " ")
    timestamp = parse_signature_time(stamp)
    if not name or timestamp is None:
        return None
    if link.group("ip"):
        try:
            return Editor.anonymous(name), timestamp
        except ValueError:
            return Editor.registered(name), timestamp
    return Editor.from_name(name), timestamp


def _indent_depth(line):
    line = OUTDENT.sub("", line.lstrip())
    match = INDENT.match(line)
    return len(match.group()) if match else 0


def iter_sections(text):
    """Yield (heading, body) of every headed section, flat."""
    code = mwparserfromhell.parse(text or "")
    for section in code.get_sections(flat=True, include_lead=False):
        headings = section.filter_headings(recursive=False)
        if not headings:
            continue
        heading = headings[0]
        body = str(section)[len(str(heading)):]
        yield heading.title.strip_code().strip(), body


def _section_blocks(body):
    """Split a section body into (first_line, text, signature) blocks; unsigned tail text is returned separately."""
    blocks = []
    buffer = []
    for line in body.splitlines():
        if not line.strip() and not buffer:
            continue
        buffer.append(line)
        signature = find_signature(line)
        if signature is not None:
            blocks.append((buffer[0], "\n".join(buffer).strip(), signature))
            buffer = []
    tail = "\n".join(buffer).strip()
    return blocks, tail


def parse_talk_text(text, article="", t_prom=None):
    """
    Parse one talk revision into comments.

    Depth is the count of leading ``:``/``*``/``#`` markers, clamped so a
    child sits exactly one level below its parent; the parent is the nearest
    preceding comment one level up. Unsigned text joins the previous
    comment. Comments signed after ``t_prom`` are left out.

    Returns:
        list: Comment values ordered by (thread_id, comment_id)
    """
    comments = []
    for thread_id, (_, body) in enumerate(iter_sections(text), start=1):
        blocks, tail = _section_blocks(body)
        stack = []
        thread_comments = []
        for first_line, block_text, (editor, timestamp) in blocks:
            if t_prom is not None and timestamp > t_prom:
                continue
            raw = _indent_depth(first_line)
            while stack and stack[-1][0] >= raw:
                stack.pop()
            parent = stack[-1][1] if stack else None
            comment = Comment(
                thread_id=thread_id,
                comment_id=len(thread_comments) + 1,
                parent_comment_id=parent.comment_id if parent else None,
                discusser=editor,
                timestamp=timestamp,
                depth=parent.depth + 1 if parent else 0,
                text=block_text,
                article=article,
            )
            stack.append((raw, comment))
            thread_comments.append(comment)
        if tail and thread_comments:
            last = thread_comments[-1]
            thread_comments[-1] = dataclasses.replace(last, text=f"{last.text}\n{tail}")
        comments.extend(thread_comments)
    return comments


def parse_discussions(talk_history, t_prom, article=""):
    """
    Comments of the latest talk revision dated at or before ``t_prom``.

    Args:
        talk_history (sequence): Talk revisions, ascending
        t_prom (int): Promotion time of the active use case
        article (str): Article title stamped on every comment

    Returns:
        list: Comment values; empty when nothing is signed
    """
    in_window = [r for r in talk_history if r.timestamp <= t_prom]
    if not in_window:
        return []
    comments = parse_talk_text(in_window[-1].text, article=article, t_prom=t_prom)
    logging.debug(f"Parsed {len(comments)} comments for '{article}'")
    return comments


def _block_key(comment):
    return comment.discusser.name, comment.timestamp


def comment_revisers(talk_history, t_prom):
    """
    Who wrote or changed each comment block across in-window talk revisions.

    A block is identified by its signer and signature time. Its author is a
    reviser; so is the editor of every later revision that changes the
    block's text, unless that editor is unknown.

    Returns:
        dict: (signer name, signature time) -> set of editor names
    """
    revisers = {}
    last_text = {}
    for revision in talk_history:
        if revision.timestamp > t_prom:
            break
        for comment in parse_talk_text(revision.text, t_prom=t_prom):
            key = _block_key(comment)
            if key not in revisers:
                revisers[key] = {comment.discusser.name}
            elif last_text[key] != comment.text and not revision.editor.is_unknown:
                revisers[key].add(revision.editor.name)
            last_text[key] = comment.text
    return revisers


def mixed_comment_fraction(comments, revisers):
    """Fraction of comments whose block was revised by at least two distinct discussers."""
    if not comments:
        return 0.0
    mixed = sum(1 for c in comments if len(revisers.get(_block_key(c), ())) >= 2)
    return mixed / len(comments)
