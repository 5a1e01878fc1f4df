"""Append-only session persistence: one JSON-lines event file per session plus an index.

Mutations are serialized per session (single writer); events are appended to
disk before being acknowledged, so a restarted service replays the identical
history, including every randomized draw.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..config import TrialConfig, config_from_dict, config_to_dict
from .sessions import SessionError, TrialSession, new_session_id


class SessionStore:
    def __init__(self, data_dir: str | Path, replay_check: bool = False):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.replay_check = replay_check
        self._sessions: dict[str, TrialSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()

    # ------------------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _index_path(self) -> Path:
        return self.data_dir / "index.json"

    def _update_index(self, session_id: str) -> None:
        path = self._index_path()
        index = {}
        if path.exists():
            index = json.loads(path.read_text())
        index[session_id] = {"log": self._log_path(session_id).name}
        path.write_text(json.dumps(index, indent=2) + "\n")

    def _append_events(self, session_id: str, events: list[dict]) -> None:
        with self._log_path(session_id).open("a") as fh:
            for event in events:
                fh.write(json.dumps(event) + "\n")

    def _read_events(self, session_id: str) -> list[dict]:
        path = self._log_path(session_id)
        if not path.exists():
            raise SessionError(404, "not_found", f"unknown session {session_id!r}")
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]

    def lock(self, session_id: str) -> threading.Lock:
        with self._store_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    # ------------------------------------------------------------------

    def create(self, config: TrialConfig) -> TrialSession:
        session_id = new_session_id()
        session = TrialSession(id=session_id, config=config)
        created = session._event("created", {"config": config_to_dict(config)})
        with self.lock(session_id):
            self._append_events(session_id, [created])
            self._update_index(session_id)
            session.apply(created)
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> TrialSession:
        session = self._sessions.get(session_id)
        if session is None:
            session = self._load(session_id)
            self._sessions[session_id] = session
        return session

    def _load(self, session_id: str) -> TrialSession:
        events = self._read_events(session_id)
        if not events or events[0]["kind"] != "created":
            raise SessionError(500, "corrupt_log", f"session {session_id!r} has no creation event")
        config = config_from_dict(events[0]["payload"]["config"])
        return TrialSession.replay(session_id, config, events)

    def commit(self, session: TrialSession, events: list[dict]) -> None:
        """Persist then apply events; optionally verify replay reproduces the state."""
        if not events:
            return
        self._append_events(session.id, events)
        for event in events:
            session.apply(event)
        if self.replay_check:
            replayed = self._load(session.id)
            if [s.counts for s in replayed.states] != [s.counts for s in session.states] or (
                replayed.seq != session.seq
                or replayed.pending_arm != session.pending_arm
                or replayed.terminated != session.terminated
            ):
                raise SessionError(500, "replay_mismatch", "event-log replay diverged from state")
