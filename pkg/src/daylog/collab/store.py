"""Append-only pseudo-label store: newline-delimited JSON + hash chain.

Every line holds one record plus `prev` (the previous line's hash, or 64
zeros for the first line) and `hash` = SHA-256 over `prev` and the
record's canonical JSON. Appending can only extend the file; any edit,
deletion, or reorder of existing lines breaks the chain and is caught by
`verify_chain`.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .types import PseudoLabelRecord

GENESIS_HASH = "0" * 64


class StoreIntegrityError(RuntimeError):
    """Raised when the hash chain does not verify."""


def _chain_hash(prev_hash: str, record: PseudoLabelRecord) -> str:
    digest = hashlib.sha256()
    digest.update(prev_hash.encode("ascii"))
    digest.update(record.canonical_json().encode("utf-8"))
    return digest.hexdigest()


class PseudoLabelStore:
    """Serialized append-only access to one NDJSON store file."""

    def __init__(self, path, categories: tuple[str, ...] | None = None):
        self.path = Path(path)
        self.categories = tuple(categories) if categories else None

    def _lines(self) -> list[dict]:
        if not self.path.exists():
            return []
        lines = []
        with self.path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    lines.append(json.loads(raw))
                except json.JSONDecodeError as exc:
                    raise StoreIntegrityError(
                        f"{self.path}:{lineno}: not valid JSON: {exc}")
        return lines

    def __len__(self) -> int:
        return len(self._lines())

    def last_hash(self) -> str:
        lines = self._lines()
        return lines[-1]["hash"] if lines else GENESIS_HASH

    def append(self, record: PseudoLabelRecord) -> str:
        """Append one record; returns its chain hash."""
        if self.categories is not None \
                and record.llm_label not in self.categories:
            raise ValueError(
                f"llm label {record.llm_label!r} is outside the category "
                "list; rejected responses are never stored")
        prev = self.last_hash()
        entry = dict(record.to_payload())
        entry["prev"] = prev
        entry["hash"] = _chain_hash(prev, record)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True,
                                separators=(",", ":"),
                                ensure_ascii=False) + "\n")
        return entry["hash"]

    def records(self) -> list[PseudoLabelRecord]:
        """All records in append order, after verifying the chain."""
        self.verify_chain()
        return [PseudoLabelRecord.from_payload(line)
                for line in self._lines()]

    def verify_chain(self) -> int:
        """Walk the chain; returns the record count or raises."""
        prev = GENESIS_HASH
        for i, line in enumerate(self._lines()):
            if line.get("prev") != prev:
                raise StoreIntegrityError(
                    f"record {i}: prev hash mismatch (chain edited or "
                    "reordered)")
            record = PseudoLabelRecord.from_payload(line)
            expected = _chain_hash(prev, record)
            if line.get("hash") != expected:
                raise StoreIntegrityError(
                    f"record {i}: content hash mismatch (record mutated)")
            prev = line["hash"]
        return len(self._lines())
