"""
Topic feature family.

WikiProject banners on the talk page carry an importance rating; each of
the registry's projects becomes one 0-4 Likert column.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

import mwparserfromhell

from src.errors import ConfigError
from src.utils import stable_json_dumps
from src.window import FeatureBlock

REGISTRY_SIZE = 250
DEFAULT_REMOVED = ("Spoken Wikipedia", "Articles for creation", "Guild of Copy Editors")
ACTIVE_SIZE = REGISTRY_SIZE - len(DEFAULT_REMOVED)

IMPORTANCE = {"top": 4, "high": 3, "mid": 2, "low": 1}
UNRATED_IMPORTANCE = 1

BANNER_PREFIX = "wikiproject "
BANNER_SHELLS = {"wikiproject banner shell", "wikiprojectbannershell", "wikiproject banners"}


def _key(name):
    return " ".join(name.replace("_", " ").lower().split())


@dataclass(frozen=True)
class WikiProjectRegistry:
    """Ordered active project names; the order fixes the topic column layout."""
    names: Tuple[str, ...]
    aliases: Dict[str, str] = field(default_factory=dict)

    def resolve(self, project):
        """Canonical registry name of a project (or alias), None when not registered."""
        return self.aliases.get(_key(project))

    @property
    def columns(self):
        return tuple(f"Topic-{name}" for name in self.names)


def _registry_from_entries(entries):
    names = []
    aliases = {}
    for entry in entries:
        if entry.get("removed"):
            continue
        names.append(entry["name"])
        aliases[_key(entry["name"])] = entry["name"]
        for alias in entry.get("aliases", []):
            aliases.setdefault(_key(alias), entry["name"])
    return WikiProjectRegistry(names=tuple(names), aliases=aliases)


def read_registry_entries(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            entries = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError("paths.registry", f"cannot read registry {path}: {e}") from e
    if not isinstance(entries, list):
        raise ConfigError("paths.registry", "registry must be a JSON array of {name, aliases, removed}")
    return entries


def load_registry(path, expected_size=ACTIVE_SIZE):
    """
    Load a registry file and check it holds exactly ``expected_size`` active projects.

    Raises:
        ConfigError: Unreadable file or wrong number of active entries
    """
    registry = _registry_from_entries(read_registry_entries(path))
    if len(registry.names) != expected_size:
        raise ConfigError("paths.registry",
                          f"registry has {len(registry.names)} active projects, expected {expected_size}")
    if len(set(registry.names)) != len(registry.names):
        raise ConfigError("paths.registry", "duplicate project names in registry")
    return registry


def iter_banners(text):
    """Yield (project, importance) for every WikiProject banner, including nested ones."""
    code = mwparserfromhell.parse(text or "")
    for template in code.filter_templates(recursive=True):
        name = _key(template.name.strip_code())
        if name in BANNER_SHELLS or not name.startswith(BANNER_PREFIX):
            continue
        importance = ""
        if template.has("importance"):
            importance = template.get("importance").value.strip_code().strip().lower()
        yield name[len(BANNER_PREFIX):], importance


def build_registry(talk_texts, seed_entries, size=REGISTRY_SIZE, removed=DEFAULT_REMOVED):
    """
    Rank WikiProjects by how many corpus articles carry their banner.

    The top ``size - len(removed)`` non-removed projects become active; the
    removed names are appended flagged ``removed``. Ties and projects the
    corpus never mentions fall back to seed order, so a small corpus still
    yields a full registry.

    Args:
        talk_texts (iterable): Latest talk-page wikitext of each corpus article
        seed_entries (list): Seed registry entries ({name, aliases, removed})
        size (int): Registry size including removed projects
        removed (sequence): Project names excluded by hand

    Returns:
        list: Registry entries, active first in rank order
    """
    seed_order = {}
    alias_map = {}
    aliases_of = {}
    for index, entry in enumerate(seed_entries):
        seed_order.setdefault(entry["name"], index)
        alias_map[_key(entry["name"])] = entry["name"]
        aliases_of[entry["name"]] = list(entry.get("aliases", []))
        for alias in entry.get("aliases", []):
            alias_map.setdefault(_key(alias), entry["name"])

    counts = Counter()
    for text in talk_texts:
        seen = set()
        for project, _ in iter_banners(text):
            seen.add(alias_map.get(project, project[:1].upper() + project[1:]))
        counts.update(seen)

    removed_keys = {_key(name) for name in removed}
    candidates = set(seed_order) | set(counts)
    ranked = sorted((name for name in candidates if _key(name) not in removed_keys),
                    key=lambda name: (-counts[name], seed_order.get(name, len(seed_order)), name))
    active = ranked[:size - len(removed)]
    if len(active) < size - len(removed):
        logging.warning(f"Only {len(active)} WikiProjects available for a registry of {size - len(removed)}")

    entries = [{"name": name, "aliases": aliases_of.get(name, []), "removed": False} for name in active]
    entries += [{"name": name, "aliases": aliases_of.get(name, []), "removed": True} for name in removed]
    logging.info(f"Registry built from {len(counts)} corpus projects; {len(active)} active")
    return entries


def write_registry(path, entries):
    with open(path, "w", encoding="utf-8") as f:
        f.write(stable_json_dumps(entries, indent=1) + "\n")


def topic_features(talk_history, registry, diagnostics=None):
    """
    Importance of the article to each registered WikiProject.

    Banners are read from the latest in-window talk revision. Top/High/Mid/Low
    map to 4/3/2/1, an unrated banner to 1, no banner to 0.

    Args:
        talk_history (sequence): In-window talk revisions, ascending
        registry (WikiProjectRegistry): Active projects
        diagnostics (Counter, optional): Receives ``unrated`` and ``unregistered`` tallies

    Returns:
        FeatureBlock: One value per registry column
    """
    values = dict.fromkeys(registry.columns, 0.0)
    text = talk_history[-1].text if talk_history else ""
    for project, importance in iter_banners(text):
        name = registry.resolve(project)
        if name is None:
            if diagnostics is not None:
                diagnostics["unregistered"] += 1
            continue
        score = IMPORTANCE.get(importance)
        if score is None:
            score = UNRATED_IMPORTANCE
            if diagnostics is not None:
                diagnostics["unrated"] += 1
        column = f"Topic-{name}"
        values[column] = max(values[column], float(score))
    return FeatureBlock(values=values)
