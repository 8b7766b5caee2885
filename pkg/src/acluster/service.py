"""Live annotation sessions over HTTP.

A session wraps one partition-recovery run where humans are the oracle: the
configured strategy proposes pairwise queries, answers land in an append-only
JSON-lines log (fsynced before acknowledgment), and the in-memory state is
always the deterministic replay of that log, which is what makes crash
recovery a non-event.  Conflicting answers switch the session into a repair
dialogue whose probes come from the same localization routine the batch
pipeline uses; once consistent again, the strategy resumes.  Several
annotators may hold queries at once, but only combinations that stay chordal
if every outstanding answer comes back negative.

Strategies only ever ask informative pairs, so a lone wrong click can never
contradict anything by itself; it silently yields the wrong partition.
Sessions created with a redundancy plan therefore do not resolve at the
strategy's last answer: they first serve verification re-asks (closures for
singly-covered in-block edges, negative top-ups between believed blocks)
until the record is 1-robust, which is where a wrong click surfaces as a
conflict and gets repaired.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from pathlib import Path
from typing import Optional

from .noise import (
    RedundancyPlan,
    RepairBudgetError,
    SignedGraph,
    detect_contradiction,
    redundancy_patches,
    repair,
)
from .oracles import make_rng
from .partition import Answer, Query, new_aggregated_graph
from .qmath import exact_moments
from .strategies import STRATEGIES, is_chordal, preserves_chordality

ACTIVE = "active"
REPAIRING = "repairing"
RESOLVED = "resolved"
ESCALATED = "escalated"

# exact-mean progress hints get expensive in exact arithmetic eventually
_HINT_LIMIT = 120


class ApiError(Exception):
    """Service-level failure carried to the HTTP layer as {code, message}."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class _NeedAnswer(Exception):
    def __init__(self, pair: tuple[int, int]):
        self.pair = pair


class RepairDialogue:
    """Incremental view of one repair run, fed by human answers.

    The batch routine drives an ask() callback; here the recorded human
    answers replay into it and the first unanswered probe surfaces as the
    pending repair query.  Completion applies the repair to the live graph.
    """

    def __init__(self, graph: SignedGraph, cycle):
        self.graph = graph
        self.cycle = cycle
        self.answers: list[bool] = []

    def _drive(self, g: SignedGraph):
        feed = iter(self.answers)

        def ask(u: int, v: int) -> bool:
            try:
                return next(feed)
            except StopIteration:
                raise _NeedAnswer(_pair(u, v)) from None

        return repair(g, self.cycle, ask)

    def pending_pair(self) -> Optional[tuple[int, int]]:
        try:
            self._drive(self.graph.copy())
        except _NeedAnswer as e:
            return e.pair
        return None

    def feed(self, positive: bool) -> str:
        """Returns "more", "done" (live graph updated) or "escalated"."""
        self.answers.append(bool(positive))
        try:
            self._drive(self.graph.copy())
        except _NeedAnswer:
            return "more"
        except RepairBudgetError:
            return "escalated"
        self._drive(self.graph)
        return "done"


class Session:
    """One annotation run: items, strategy, signed answer log, status."""

    def __init__(self, meta: dict, path: Path):
        self.id: str = meta["id"]
        self.items: list[dict] = meta["items"]
        self.strategy: str = meta["strategy"]
        self.seed: int = meta["seed"]
        self.plan = (RedundancyPlan(**meta["plan"]) if meta.get("plan") else None)
        self.path = path
        self.lock = threading.Lock()
        self.n = len(self.items)
        self.graph = SignedGraph(self.n)
        self.status = ACTIVE
        self.labels: Optional[dict[str, str]] = None
        self.answered = 0
        self.dialogue: Optional[RepairDialogue] = None
        self._taken: dict[str, tuple[int, int]] = {}
        self._proposal: Optional[tuple[int, int]] = None
        self._t = 0
        self._refresh()

    # -- state machine ----------------------------------------------------

    def _aggregated(self, extra_negatives=()):  # consistent states only
        g = new_aggregated_graph(self.n)
        signs = self.graph.sign_map()
        t = 0
        for (u, v), sign in signs.items():
            # transitively implied repeats would be redundant to the graph
            if sign and g.find(u) != g.find(v):
                g.apply_answer(Answer(Query(u, v), True, t))
                t += 1
        seen = set()
        for source in (signs, dict.fromkeys(extra_negatives, False)):
            for (u, v), sign in source.items():
                if sign:
                    continue
                key = _pair(g.find(u), g.find(v))
                if key in seen:
                    continue  # merges can collapse negatives onto one edge
                seen.add(key)
                g.apply_answer(Answer(Query(u, v), False, t))
                t += 1
        return g

    def _refresh(self) -> None:
        """Recompute the primary proposal after any consistent-state change."""
        if self.status in (REPAIRING, ESCALATED):
            self._proposal = None
            return
        g = self._aggregated()
        nxt = STRATEGIES[self.strategy](g, make_rng((self.seed, self.answered)))
        if nxt is not None:
            self._proposal = _pair(nxt.u, nxt.v)
            return
        if self.plan is not None:
            # every relation is informative-known, but a single wrong click
            # would stand undetected; harden the record until it is 1-robust
            in_block, cross = redundancy_patches(self.graph)
            patches = in_block + cross
            if patches:
                self._proposal = patches[0]
                return
        self._proposal = None
        self.status = RESOLVED

    def _apply(self, u: int, v: int, positive: bool) -> None:
        """Shared transition for live answers and log replay."""
        if self.status == REPAIRING:
            assert self.dialogue is not None
            outcome = self.dialogue.feed(positive)
            if outcome == "more":
                return
            if outcome == "escalated":
                self.status = ESCALATED
                self.dialogue = None
                self._proposal = None
                return
            self.dialogue = None
            self.status = ACTIVE
        else:
            self.graph.add(u, v, positive)
            self.answered += 1
        cycle = detect_contradiction(self.graph)
        if cycle is not None:
            self.status = REPAIRING
            self.dialogue = RepairDialogue(self.graph, cycle)
            self._proposal = None
            # strategy queries handed out before the contradiction are void;
            # their answers would otherwise be fed into the repair dialogue
            self._taken = {}
        else:
            self._refresh()

    # -- queries ----------------------------------------------------------

    def pending_for(self, token: str) -> Optional[dict]:
        if self.status == REPAIRING:
            assert self.dialogue is not None
            pair = self.dialogue.pending_pair()
            if not self._taken or self._taken.get(token) == pair:
                self._taken = {token: pair}
                return self._describe(pair, repair_probe=True)
            return None  # repair answers are serialized on one annotator
        if self.status != ACTIVE:
            return None
        if token in self._taken:
            return self._describe(self._taken[token], repair_probe=False)
        held = set(self._taken.values())
        if self._proposal is not None and self._proposal not in held:
            self._taken[token] = self._proposal
            return self._describe(self._proposal, repair_probe=False)
        extra = self._extra_proposal(held)
        if extra is None:
            return None
        self._taken[token] = extra
        return self._describe(extra, repair_probe=False)

    def _extra_proposal(self, held: set) -> Optional[tuple[int, int]]:
        """A further outstanding query, safe under all-negative answers."""
        if not held:
            return None
        g = self._aggregated(extra_negatives=held)
        rng = make_rng((self.seed, self.answered, len(held)))
        nxt = STRATEGIES[self.strategy](g, rng)
        if nxt is None:
            return None
        pair = _pair(nxt.u, nxt.v)
        if not preserves_chordality(g, g.find(pair[0]), g.find(pair[1])):
            return None
        probe = self._aggregated(extra_negatives=held | {pair})
        if not is_chordal(probe):
            return None
        return pair

    def _describe(self, pair: tuple[int, int], repair_probe: bool) -> dict:
        u, v = pair
        return {
            "u": u,
            "v": v,
            "u_item": self.items[u],
            "v_item": self.items[v],
            "repair": repair_probe,
        }

    def outstanding_pairs(self) -> set:
        pairs = set(self._taken.values())
        if self.status == REPAIRING and self.dialogue is not None:
            pairs.add(self.dialogue.pending_pair())
        elif self._proposal is not None:
            pairs.add(self._proposal)
        return pairs

    # -- answers ----------------------------------------------------------

    def submit(self, u: int, v: int, positive: bool) -> dict:
        if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
            raise ApiError(400, "invalid_request", "bad item indices")
        if self.status in (RESOLVED, ESCALATED):
            raise ApiError(409, "session_closed",
                           f"session is {self.status}; no answers expected")
        pair = _pair(u, v)
        if pair not in self.outstanding_pairs():
            raise ApiError(409, "stale_query",
                           f"pair {pair} is not an outstanding query")
        was_repair = self.status == REPAIRING
        blocks_before = len(self.graph.positive_components())
        self._persist({
            "t": self._t,
            "u": pair[0],
            "v": pair[1],
            "positive": bool(positive),
            **({"repair": True} if was_repair else {}),
        })
        self._t += 1
        self._apply(pair[0], pair[1], bool(positive))
        self._taken = {t: p for t, p in self._taken.items() if p != pair}
        delta = {
            "status": self.status,
            "merged": (not was_repair and positive
                       and len(self.graph.positive_components()) < blocks_before),
            "contradiction": self.status == REPAIRING,
            "blocks": self.blocks(),
        }
        if self.status == REPAIRING and self.dialogue is not None:
            delta["repair_query"] = self._describe(
                self.dialogue.pending_pair(), repair_probe=True)
        return delta

    # -- labels and export ------------------------------------------------

    def blocks(self) -> list[list[int]]:
        return self.graph.positive_components()

    def set_labels(self, labels: dict) -> dict:
        if self.status != RESOLVED:
            raise ApiError(409, "not_resolved",
                           f"session is {self.status}; finalize needs resolved")
        if not isinstance(labels, dict) or not all(
            isinstance(k, str) and isinstance(v, str) and v.strip()
            for k, v in labels.items()
        ):
            raise ApiError(400, "invalid_request",
                           "labels must map block index to non-empty name")
        blocks = self.blocks()
        missing = [i for i in range(len(blocks)) if str(i) not in labels]
        if missing:
            raise ApiError(400, "missing_label",
                           f"no label for block(s) {missing}")
        self.labels = {str(i): labels[str(i)] for i in range(len(blocks))}
        self._persist({"labels": self.labels})
        return self.export()

    def export(self) -> dict:
        if self.labels is None:
            raise ApiError(409, "not_labeled", "labels have not been set")
        blocks = self.blocks()
        item_labels = {}
        for i, block in enumerate(blocks):
            for idx in block:
                item_labels[self.items[idx]["id"]] = self.labels[str(i)]
        return {
            "id": self.id,
            "labels": item_labels,
            "blocks": [[self.items[i]["id"] for i in block] for block in blocks],
            "log": self._audit_log(),
        }

    def _audit_log(self) -> list[dict]:
        """The answers as persisted, in arrival order."""
        with open(self.path, encoding="utf-8") as f:
            entries = [json.loads(line) for line in f if line.strip()]
        return [e for e in entries[1:] if "labels" not in e]

    def view(self) -> dict:
        hint = None
        if self.n <= _HINT_LIMIT:
            hint = float(exact_moments(self.n)[0])
        return {
            "id": self.id,
            "status": self.status,
            "strategy": self.strategy,
            "items": self.items,
            "answered": self.answered,
            "blocks": self.blocks(),
            "labels": self.labels,
            "expected_queries": hint,
            "plan": ({"r": self.plan.r, "r_prime": self.plan.r_prime}
                     if self.plan else None),
        }

    # -- persistence ------------------------------------------------------

    def _persist(self, entry: dict) -> None:
        # the log line must be durable before the answer is acknowledged
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry) + "\n")
            f.flush()
            os.fsync(f.fileno())

    @classmethod
    def create(cls, data_dir: Path, items, strategy: str, plan: Optional[dict]):
        if not isinstance(items, list) or not items:
            raise ApiError(400, "invalid_request", "need at least one item")
        descriptors = []
        for it in items:
            if isinstance(it, str):
                it = {"id": it, "payload": it}
            if not isinstance(it, dict) or "id" not in it:
                raise ApiError(400, "invalid_request",
                               "items are strings or {id, payload} objects")
            descriptors.append({"id": str(it["id"]),
                                "payload": str(it.get("payload", it["id"]))})
        ids = [d["id"] for d in descriptors]
        if len(set(ids)) != len(ids):
            raise ApiError(400, "invalid_request", "duplicate item ids")
        if strategy not in STRATEGIES:
            raise ApiError(400, "invalid_request",
                           f"unknown strategy {strategy!r}")
        if plan is not None:
            try:
                plan = {"r": int(plan["r"]),
                        "r_prime": (int(plan["r_prime"])
                                    if plan.get("r_prime") is not None else None)}
                RedundancyPlan(plan["r"], plan["r_prime"])
            except (KeyError, TypeError, ValueError) as e:
                raise ApiError(400, "invalid_request",
                               f"bad redundancy plan: {e}") from None
        meta = {
            "id": secrets.token_hex(8),
            "items": descriptors,
            "strategy": strategy,
            "seed": secrets.randbits(32),
            "plan": plan,
        }
        path = data_dir / f"{meta['id']}.jsonl"
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps({"meta": meta}) + "\n")
            f.flush()
            os.fsync(f.fileno())
        return cls(meta, path)

    @classmethod
    def load(cls, path: Path) -> "Session":
        with open(path, encoding="utf-8") as f:
            lines = [json.loads(line) for line in f if line.strip()]
        if not lines or "meta" not in lines[0]:
            raise ValueError(f"{path} is not a session log")
        session = cls(lines[0]["meta"], path)
        for entry in lines[1:]:
            if "labels" in entry:
                session.labels = entry["labels"]
            else:
                session._apply(entry["u"], entry["v"], entry["positive"])
                session._t += 1
        return session


class SessionService:
    """Registry of sessions persisted under one data directory."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        for path in sorted(self.data_dir.glob("*.jsonl")):
            session = Session.load(path)
            self._sessions[session.id] = session

    def create(self, items, strategy="chordal-any", plan=None) -> Session:
        session = Session.create(self.data_dir, items, strategy, plan)
        with self._registry_lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session",
                           f"no session {session_id!r}")
        return session


def create_app(service: SessionService):
    """FastAPI wiring over a SessionService; endpoints are thin."""
    from fastapi import Body, FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="acluster annotation service")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        session = service.create(
            body.get("items"),
            body.get("strategy", "chordal-any"),
            body.get("plan"),
        )
        with session.lock:
            return session.view()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = service.get(session_id)
        with session.lock:
            return session.view()

    @app.get("/sessions/{session_id}/next")
    def next_query(session_id: str, annotator: str = "default"):
        session = service.get(session_id)
        with session.lock:
            if session.status in (RESOLVED, ESCALATED):
                return {"status": session.status, "query": None}
            pending = session.pending_for(annotator)
            if pending is None:
                return {"status": session.status, "query": None, "wait": True}
            return {"status": session.status, "query": pending}

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: dict = Body(...)):
        session = service.get(session_id)
        try:
            u, v = int(body["u"]), int(body["v"])
            positive = bool(body["positive"])
        except (KeyError, TypeError, ValueError):
            raise ApiError(400, "invalid_request",
                           "body must carry integer u, v and boolean positive")
        with session.lock:
            return session.submit(u, v, positive)

    @app.post("/sessions/{session_id}/labels")
    def set_labels(session_id: str, body: dict = Body(...)):
        session = service.get(session_id)
        with session.lock:
            return session.set_labels(body.get("labels", body))

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        session = service.get(session_id)
        with session.lock:
            return session.export()

    return app
