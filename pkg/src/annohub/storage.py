"""Pluggable document-store backends.

A backend is a set of named collections holding JSON-serializable documents
keyed by string. Two implementations ship: a process-local in-memory store and
a durable append-log store that replays its log on open. Higher layers treat
both identically, so tests run in memory and deployments persist to disk.
"""

from __future__ import annotations

import copy
import json
import os
import threading
from typing import Iterator, Protocol


class StorageBackend(Protocol):
    def get(self, collection: str, key: str) -> dict | None: ...

    def put(self, collection: str, key: str, doc: dict) -> None: ...

    def delete(self, collection: str, key: str) -> bool: ...

    def items(self, collection: str) -> Iterator[tuple[str, dict]]: ...

    def clear(self) -> None: ...


class MemoryBackend:
    """Dict-of-dicts store. Documents are copied on the way in and out so
    callers can never mutate stored state through a retained reference."""

    def __init__(self):
        self._data: dict[str, dict[str, dict]] = {}
        self._lock = threading.RLock()

    def get(self, collection: str, key: str) -> dict | None:
        with self._lock:
            doc = self._data.get(collection, {}).get(key)
            return copy.deepcopy(doc) if doc is not None else None

    def put(self, collection: str, key: str, doc: dict) -> None:
        with self._lock:
            self._data.setdefault(collection, {})[key] = copy.deepcopy(doc)

    def delete(self, collection: str, key: str) -> bool:
        with self._lock:
            coll = self._data.get(collection)
            if coll is None or key not in coll:
                return False
            del coll[key]
            return True

    def items(self, collection: str) -> Iterator[tuple[str, dict]]:
        with self._lock:
            snapshot = copy.deepcopy(self._data.get(collection, {}))
        return iter(sorted(snapshot.items()))

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


class FileBackend:
    """Append-log store: one JSON line per mutation, replayed on open.

    The in-memory image is authoritative after replay; `compact()` rewrites
    the log to one line per live document (called automatically on open when
    the log holds more than twice as many entries as live documents).
    """

    def __init__(self, path: str):
        self._path = path
        self._memory = MemoryBackend()
        self._lock = threading.RLock()
        self._entries = 0
        self._live = 0
        self._replay()
        if self._entries > max(64, 2 * self._live):
            self._compact_locked()
        else:
            self._open_for_append()

    def _open_for_append(self) -> None:
        self._fh = open(self._path, "a", encoding="utf-8")
        # A torn final write leaves no trailing newline; appending onto that
        # line would corrupt the next entry too, so terminate it first.
        if self._fh.tell() > 0:
            with open(self._path, "rb") as probe:
                probe.seek(-1, os.SEEK_END)
                if probe.read(1) != b"\n":
                    self._fh.write("\n")
                    self._fh.flush()

    def _replay(self) -> None:
        if not os.path.exists(self._path):
            parent = os.path.dirname(self._path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            return
        with open(self._path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    # torn final write after a crash: ignore the partial line
                    continue
                self._entries += 1
                if entry.get("op") == "put":
                    self._memory.put(entry["collection"], entry["key"], entry["doc"])
                elif entry.get("op") == "delete":
                    self._memory.delete(entry["collection"], entry["key"])
        self._live = sum(len(dict(self._memory.items(c))) for c in self._collections())

    def _collections(self) -> list[str]:
        return list(self._memory._data.keys())

    def _append(self, entry: dict) -> None:
        self._fh.write(json.dumps(entry, separators=(",", ":"), ensure_ascii=False) + "\n")
        self._fh.flush()
        self._entries += 1
        if self._entries > max(64, 2 * self._live):
            self._compact_locked()

    def get(self, collection: str, key: str) -> dict | None:
        return self._memory.get(collection, key)

    def put(self, collection: str, key: str, doc: dict) -> None:
        with self._lock:
            if self._memory.get(collection, key) is None:
                self._live += 1
            self._memory.put(collection, key, doc)
            self._append({"op": "put", "collection": collection, "key": key, "doc": doc})

    def delete(self, collection: str, key: str) -> bool:
        with self._lock:
            removed = self._memory.delete(collection, key)
            if removed:
                self._live -= 1
                self._append({"op": "delete", "collection": collection, "key": key})
            return removed

    def items(self, collection: str) -> Iterator[tuple[str, dict]]:
        return self._memory.items(collection)

    def clear(self) -> None:
        with self._lock:
            self._memory.clear()
            self._fh.close()
            self._fh = open(self._path, "w", encoding="utf-8")
            self._entries = 0
            self._live = 0

    def compact(self) -> None:
        with self._lock:
            self._compact_locked()

    def _compact_locked(self) -> None:
        tmp = self._path + ".compact"
        with open(tmp, "w", encoding="utf-8") as out:
            n = 0
            for collection in sorted(self._collections()):
                for key, doc in self._memory.items(collection):
                    out.write(
                        json.dumps(
                            {"op": "put", "collection": collection, "key": key, "doc": doc},
                            separators=(",", ":"),
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                    n += 1
            out.flush()
            os.fsync(out.fileno())
        # the append handle must move to the new inode or later writes vanish
        old = getattr(self, "_fh", None)
        if old is not None:
            old.close()
        os.replace(tmp, self._path)
        self._fh = open(self._path, "a", encoding="utf-8")
        self._entries = n
        self._live = n

    def close(self) -> None:
        self._fh.close()
