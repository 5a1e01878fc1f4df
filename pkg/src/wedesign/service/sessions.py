"""Live trial sessions: event-sourced state, deterministic draws, pure views.

A session's entire state derives from its event log: replaying the log over
the config reproduces the per-arm posteriors, the pending assignment, and all
randomization exactly (each randomized draw is stored with its event, and new
draws come from a counter-based stream derived from the config seed, so
crash recovery never re-randomizes history).
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..allocation import (
    RULE_I,
    RULE_II,
    admissible_set,
    assignment_decision,
    final_recommendation,
    overdose_probability,
    plugin_delta,
    plugin_deltas,
    randomization_probabilities,
    safety_threshold,
)
from ..config import TrialConfig
from ..criterion import posterior_update
from ..types import ArmState, CriterionParams, SimplexVector


class SessionError(Exception):
    """Domain error with an HTTP-ready status and machine-readable code."""

    def __init__(self, status: int, code: str, message: str, field_name: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field_name = field_name


def _draw(seed: int, index: int) -> float:
    """The index-th assignment uniform of a session; stateless and replayable."""
    return float(np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index)))).random())


@dataclass
class TrialSession:
    """In-memory session state; every mutation flows through apply()."""

    id: str
    config: TrialConfig
    states: list[ArmState] = field(default_factory=list)
    seq: int = 0
    pending_arm: int | None = None
    draws_used: int = 0
    terminated: bool = False
    recommendation_logged: bool = False
    recommendation: int | None = None
    idempotency_keys: set[str] = field(default_factory=set)

    # ------------------------------------------------------------------
    # event application (the single state-transition path, used by replay)

    def apply(self, event: dict) -> None:
        kind = event["kind"]
        payload = event.get("payload", {})
        if event["seq"] != self.seq + 1:
            raise SessionError(500, "corrupt_log", f"event seq {event['seq']} after {self.seq}")
        self.seq = event["seq"]
        if kind == "created":
            self.states = self.config.initial_states()
        elif kind == "assigned":
            self.pending_arm = payload["arm"]
            if payload.get("u") is not None:
                self.draws_used += 1
        elif kind == "outcome":
            arm = payload["arm"]
            self.states[arm] = posterior_update(self.states[arm], payload["outcome"])
            self.pending_arm = None
            key = payload.get("idempotency_key")
            if key:
                self.idempotency_keys.add(key)
        elif kind == "terminated":
            self.terminated = True
            self.pending_arm = None
        elif kind == "recommended":
            self.recommendation_logged = True
            self.recommendation = payload.get("arm")
        else:
            raise SessionError(500, "corrupt_log", f"unknown event kind {kind!r}")

    @classmethod
    def replay(cls, session_id: str, config: TrialConfig, events: list[dict]) -> "TrialSession":
        session = cls(id=session_id, config=config)
        for event in events:
            session.apply(event)
        return session

    # ------------------------------------------------------------------
    # derived quantities

    @property
    def treated(self) -> int:
        return sum(s.n for s in self.states)

    @property
    def completed(self) -> bool:
        return self.treated >= self.config.max_patients

    @property
    def status(self) -> str:
        if self.terminated:
            return "terminated"
        return "completed" if self.completed else "in_progress"

    def _params(self) -> CriterionParams:
        return self.config.criterion_params()

    def _admissible(self, states) -> set[int]:
        return admissible_set(states, self.config.safety)

    def _next_preview(self, states) -> dict:
        """What the next assignment would be, computed without consuming entropy."""
        admissible = sorted(self._admissible(states))
        if not admissible:
            return {"kind": "terminate", "arm": None, "probabilities": None}
        deltas = plugin_deltas(states, self._params())
        if self.config.rule == RULE_I:
            sub = randomization_probabilities([deltas[i] for i in admissible])
            probs = [0.0] * len(states)
            for i, p in zip(admissible, sub):
                probs[i] = p
            return {"kind": "assign", "arm": None, "probabilities": probs}
        best = admissible[0]
        for i in admissible[1:]:
            if deltas[i] < deltas[best]:
                best = i
        return {"kind": "assign", "arm": best, "probabilities": None}

    def view(self, states=None, seq=None) -> dict:
        """Full session view; optionally over hypothetical post-outcome states (what-if)."""
        hypothetical = states is not None
        states = self.states if states is None else states
        seq = self.seq if seq is None else seq
        # A hypothetical view shows the state record_outcome would leave behind,
        # so the pending assignment reads as resolved.
        pending = None if hypothetical else self.pending_arm
        params = self._params()
        final_params = CriterionParams(gamma=SimplexVector(self.config.gamma), kappa=0.5)
        deltas = plugin_deltas(states, params)
        admissible = self._admissible(states)
        total = sum(s.n for s in states)
        rule1_probs = None
        if self.config.rule == RULE_I and admissible:
            sub = randomization_probabilities([deltas[i] for i in sorted(admissible)])
            rule1_probs = [0.0] * len(states)
            for i, p in zip(sorted(admissible), sub):
                rule1_probs[i] = p
        arms = []
        for j, state in enumerate(states):
            entry = {
                "index": j,
                "n": state.n,
                "counts": list(state.counts),
                "posterior_mode": [
                    (x + v) / (state.n + state.beta)
                    for x, v in zip(state.counts, state.prior)
                ],
                "delta": deltas[j],
                "delta_final": plugin_delta(state, final_params),
                "admissible": j in admissible,
                "selection_probability": None if rule1_probs is None else rule1_probs[j],
            }
            if self.config.safety is not None:
                cfg = self.config.safety
                n_for_theta = total if cfg.scope == "trial" else state.n
                entry["safety_threshold"] = safety_threshold(n_for_theta, cfg)
                entry["overdose_probability"] = overdose_probability(
                    state, cfg.gamma_star, cfg.toxicity_outcome
                )
            arms.append(entry)
        return {
            "id": self.id,
            "status": "terminated" if self.terminated else (
                "completed" if total >= self.config.max_patients else "in_progress"
            ),
            "seq": seq,
            "patients_treated": total,
            "max_patients": self.config.max_patients,
            "rule": self.config.rule,
            "kappa": self.config.kappa,
            "gamma": list(self.config.gamma),
            "pending_assignment": pending,
            "recommendation": self.recommendation if self.recommendation_logged else None,
            "recommended": self.recommendation_logged,
            "arms": arms,
            "next_preview": self._next_preview(states),
            "hypothetical": hypothetical,
        }

    # ------------------------------------------------------------------
    # commands: validate, build events, apply

    def command_assignment(self) -> tuple[list[dict], dict]:
        if self.terminated:
            raise SessionError(410, "gone", "session is terminated")
        if self.recommendation_logged:
            raise SessionError(409, "conflict", "final recommendation already issued")
        if self.pending_arm is not None:
            raise SessionError(
                409, "conflict", f"assignment for arm {self.pending_arm} is still unresolved"
            )
        if self.completed:
            raise SessionError(
                409, "conflict", "all patients treated; request the final recommendation"
            )
        u = None
        if self.config.rule != RULE_II:
            u = _draw(self.config.seed, self.draws_used)
        decision = assignment_decision(
            self.config.rule, self.states, self._params(), self.config.safety, u if u is not None else 0.0
        )
        if decision.terminated:
            return [self._event("terminated", {"reason": "no_admissible_arms"})], {
                "kind": "terminate"
            }
        payload: dict[str, Any] = {"arm": decision.arm}
        if u is not None:
            payload["u"] = u
            payload["probabilities"] = list(decision.probabilities or ())
        return [self._event("assigned", payload)], {"kind": "assign", "arm": decision.arm}

    def command_outcome(self, arm: int, outcome: int, idempotency_key: str | None):
        if self.terminated:
            raise SessionError(410, "gone", "session is terminated")
        if idempotency_key and idempotency_key in self.idempotency_keys:
            return [], None  # duplicate: no event, current view
        if self.pending_arm is None:
            raise SessionError(409, "conflict", "no assignment is pending")
        if arm != self.pending_arm:
            raise SessionError(
                409, "conflict", f"pending assignment is arm {self.pending_arm}, not {arm}"
            )
        if not 0 <= outcome < self.config.outcomes:
            raise SessionError(400, "invalid_argument", f"outcome {outcome} out of range", "outcome")
        payload = {"arm": arm, "outcome": outcome}
        if idempotency_key:
            payload["idempotency_key"] = idempotency_key
        return [self._event("outcome", payload)], None

    def command_recommendation(self) -> list[dict]:
        if self.recommendation_logged:
            return []
        if self.terminated:
            return [self._event("recommended", {"arm": None})]
        if not self.completed:
            remaining = self.config.max_patients - self.treated
            raise SessionError(
                409, "conflict", f"trial still in progress: {remaining} patients remaining"
            )
        eligible = sorted(self._admissible(self.states))
        arm = final_recommendation(self.states, self.config.gamma, eligible)
        events = []
        if arm is None:
            events.append(self._event("terminated", {"reason": "no_admissible_arms"}))
            events.append(self._event("recommended", {"arm": None}, offset=1))
        else:
            events.append(self._event("recommended", {"arm": arm}))
        return events

    def whatif(self, arm: int, outcome: int) -> dict:
        if not 0 <= arm < self.config.arms:
            raise SessionError(400, "invalid_argument", f"arm {arm} out of range", "arm")
        if not 0 <= outcome < self.config.outcomes:
            raise SessionError(400, "invalid_argument", f"outcome {outcome} out of range", "outcome")
        states = list(self.states)
        states[arm] = posterior_update(states[arm], outcome)
        return self.view(states=states, seq=self.seq + 1)

    def _event(self, kind: str, payload: dict, offset: int = 0) -> dict:
        return {
            "seq": self.seq + 1 + offset,
            "ts": time.time(),
            "kind": kind,
            "payload": payload,
        }


def new_session_id() -> str:
    return uuid.uuid4().hex
