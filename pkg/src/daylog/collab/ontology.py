"""Two-level ontology reduction for detected audio classes.

Fine-grained audio classes reduce to coarse parents before prompting, so
the language model reasons over a few dozen stable categories instead of
hundreds of near-duplicates. The shipped map covers the synthetic event
vocabulary; the format is one `child<TAB>parent<TAB>grandparent` row per
class (grandparent may be empty when only one level is defined).
"""

from __future__ import annotations

import warnings
from importlib import resources
from pathlib import Path

from .types import SoundEvent

MAX_PARENT_SET = 50


class OntologyMap:
    """child -> (parent, grandparent-or-None) over audio class names."""

    def __init__(self, entries: dict[str, tuple[str, str | None]]):
        if not entries:
            raise ValueError("empty ontology")
        self.entries = dict(entries)
        reduced = {self.reduced_class(c) for c in self.entries}
        if len(reduced) > MAX_PARENT_SET:
            raise ValueError(
                f"ontology reduces to {len(reduced)} classes; the shipped "
                f"map must stay at or below {MAX_PARENT_SET}")

    def __contains__(self, class_name: str) -> bool:
        return class_name in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def reduced_class(self, class_name: str) -> str:
        parent, grandparent = self.entries[class_name]
        return grandparent if grandparent else parent


def load_ontology(path) -> OntologyMap:
    """Parse a `child<TAB>parent<TAB>grandparent` table."""
    entries: dict[str, tuple[str, str | None]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise ValueError(
                f"{path}:{lineno}: expected 2 or 3 tab-separated fields, "
                f"got {len(parts)}")
        child, parent = parts[0].strip(), parts[1].strip()
        grandparent = parts[2].strip() if len(parts) == 3 else ""
        if not child or not parent:
            raise ValueError(f"{path}:{lineno}: empty child or parent")
        if child in entries:
            raise ValueError(f"{path}:{lineno}: duplicate child {child!r}")
        entries[child] = (parent, grandparent or None)
    return OntologyMap(entries)


def default_ontology_path() -> Path:
    return Path(resources.files("daylog.collab") / "data" / "ontology.tsv")


def load_default_ontology() -> OntologyMap:
    """The map shipped with the package, covering the toy event classes."""
    return load_ontology(default_ontology_path())


def reduce_ontology(event: SoundEvent, ontology: OntologyMap) -> SoundEvent:
    """Replace the event's reduced class with its coarsest ancestor.

    The probability is untouched. A class missing from the map passes
    through unchanged with a warning rather than failing the pipeline.
    """
    if event.class_name not in ontology:
        warnings.warn(
            f"audio class {event.class_name!r} is not in the ontology; "
            "keeping it unreduced", RuntimeWarning, stacklevel=2)
        return event
    return SoundEvent(class_name=event.class_name,
                      probability=event.probability,
                      reduced_class=ontology.reduced_class(event.class_name))
