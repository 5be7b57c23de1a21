"""The trace driver: sessions, stepping, filtering and analyzer dispatch.

The driver sits between the engine+tracer and any number of analyzers.  It
owns chrono assignment, always retains the full trace regardless of
filters, and delivers each event to exactly the analyzers whose filter
matches it at notification time.  Filtering never suppresses extraction;
missed events are not replayed on filter widening but stay available
through ``fetch`` over the stored full trace.

All session mutations are serialized through one lock, so callers on any
thread observe a linearizable session.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import engine as eng
from .lang import parse_program, parse_query, render_constraint
from .tracer import ActualTraceEvent, Trace, extract, to_xml

log = logging.getLogger(__name__)


class DriverError(Exception):
    pass


class DuplicateAnalyzer(DriverError):
    pass


class UnknownAnalyzer(DriverError):
    pass


class NotStepMode(DriverError):
    pass


class NoActiveSession(DriverError):
    pass


# Session status values; RUNNING only ever appears transiently to observers
# of an asynchronous front end, the driver itself returns the settled ones.
IDLE = "idle"
PAUSED = "paused"
RUNNING = "running"
FINISHED = "finished"
FAILED = "failed"


@dataclass(frozen=True)
class FilterQuery:
    """Conjunctive event predicate; an empty query matches everything."""

    kinds: Optional[frozenset[str]] = None
    chrono_range: Optional[tuple[int, int]] = None
    attr_contains: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.chrono_range is not None and self.chrono_range[0] > self.chrono_range[1]:
            raise ValueError("chrono_range lower bound above upper bound")

    def matches(self, event: ActualTraceEvent) -> bool:
        if self.kinds is not None and event.kind not in self.kinds:
            return False
        if self.chrono_range is not None:
            lo, hi = self.chrono_range
            if not lo <= event.chrono <= hi:
                return False
        for name, needle in self.attr_contains:
            value = event.attributes.get(name)
            if value is None or needle not in str(value):
                return False
        return True

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.kinds is not None:
            out["kinds"] = sorted(self.kinds)
        if self.chrono_range is not None:
            out["chrono_range"] = list(self.chrono_range)
        if self.attr_contains:
            out["attr_contains"] = [list(pair) for pair in self.attr_contains]
        return out

    @classmethod
    def from_json(cls, data: Optional[dict[str, Any]]) -> "FilterQuery":
        data = data or {}
        kinds = data.get("kinds")
        chrono_range = data.get("chrono_range")
        return cls(
            kinds=None if kinds is None else frozenset(kinds),
            chrono_range=None if chrono_range is None else (int(chrono_range[0]), int(chrono_range[1])),
            attr_contains=tuple((str(n), str(s)) for n, s in data.get("attr_contains", [])),
        )


MATCH_ALL = FilterQuery()

EventSink = Callable[[ActualTraceEvent], None]


@dataclass
class AnalyzerRegistration:
    analyzer_id: str
    request: FilterQuery = MATCH_ALL
    delivery: Optional[EventSink] = None


@dataclass
class DriverConfig:
    step_by_step: bool = True
    budget: int = eng.DEFAULT_BUDGET

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass
class _Session:
    run: eng.EngineRun
    program_text: str
    query_text: str
    step_by_step: bool
    trace: Trace = field(default_factory=Trace)
    snapshots: list[eng.ExecutionState] = field(default_factory=list)
    status: str = PAUSED
    ended: bool = False


class Driver:
    def __init__(self, config: Optional[DriverConfig] = None):
        self.config = config or DriverConfig()
        self._lock = threading.RLock()
        self._analyzers: dict[str, AnalyzerRegistration] = {}
        self._order: list[str] = []
        self._session: Optional[_Session] = None

    # -- analyzers ------------------------------------------------------------

    def register_analyzer(self, registration: AnalyzerRegistration) -> str:
        with self._lock:
            if registration.analyzer_id in self._analyzers:
                raise DuplicateAnalyzer(registration.analyzer_id)
            self._analyzers[registration.analyzer_id] = registration
            self._order.append(registration.analyzer_id)
            return registration.analyzer_id

    def update_filter(self, analyzer_id: str, request: FilterQuery) -> None:
        with self._lock:
            if analyzer_id not in self._analyzers:
                raise UnknownAnalyzer(analyzer_id)
            self._analyzers[analyzer_id].request = request

    def analyzer_filter(self, analyzer_id: str) -> FilterQuery:
        with self._lock:
            if analyzer_id not in self._analyzers:
                raise UnknownAnalyzer(analyzer_id)
            return self._analyzers[analyzer_id].request

    def notify(self, event: ActualTraceEvent) -> None:
        """Deliver one event to every analyzer whose current filter matches."""
        for analyzer_id in list(self._order):
            registration = self._analyzers[analyzer_id]
            if registration.delivery is None or not registration.request.matches(event):
                continue
            try:
                registration.delivery(event)
            except Exception:
                log.exception("analyzer %s failed on chrono %d", analyzer_id, event.chrono)

    # -- session --------------------------------------------------------------

    def load(
        self,
        program_text: str,
        query_text: str,
        *,
        step_by_step: Optional[bool] = None,
        budget: Optional[int] = None,
    ) -> str:
        """Parse and start a session; the first step produces the init event."""
        program = parse_program(program_text)
        query = parse_query(query_text)
        return self.load_parsed(
            program,
            query,
            program_text=program_text,
            query_text=query_text,
            step_by_step=step_by_step,
            budget=budget,
        )

    def load_parsed(
        self,
        program,
        query,
        *,
        program_text: str = "",
        query_text: str = "",
        step_by_step: Optional[bool] = None,
        budget: Optional[int] = None,
    ) -> str:
        with self._lock:
            self._session = _Session(
                run=eng.EngineRun(program, query, budget or self.config.budget),
                program_text=program_text,
                query_text=query_text,
                step_by_step=self.config.step_by_step if step_by_step is None else step_by_step,
            )
            return self._session.status

    def _require_session(self) -> _Session:
        if self._session is None:
            raise NoActiveSession("no program loaded")
        return self._session

    def _advance(self, session: _Session) -> Optional[ActualTraceEvent]:
        if session.ended:
            return None
        transition = session.run.step()
        if transition is None:
            session.status = FINISHED
            return None
        event = extract(transition, len(session.trace) + 1)
        session.trace.append(event)
        session.snapshots.append(transition.post)
        if transition.kind == eng.FAIL:
            session.status = FAILED
        self.notify(event)
        return event

    def new_step(self) -> Optional[ActualTraceEvent]:
        with self._lock:
            session = self._require_session()
            if not session.step_by_step:
                raise NotStepMode("session was not loaded in step-by-step mode")
            return self._advance(session)

    def control(self, cmd: str) -> str:
        with self._lock:
            session = self._require_session()
            if cmd == "pause":
                if session.status == RUNNING:
                    session.status = PAUSED
                return session.status
            if cmd == "continue":
                if session.ended or session.status in (FINISHED, FAILED):
                    return session.status
                session.status = RUNNING
                try:
                    while self._advance(session) is not None:
                        if session.status != RUNNING:
                            break
                finally:
                    if session.status == RUNNING:
                        session.status = PAUSED
                return session.status
            if cmd == "end":
                session.ended = True
                if session.status not in (FAILED,):
                    session.status = FINISHED
                return session.status
            raise DriverError(f"unknown control command {cmd!r}")

    def run_events(self) -> list[ActualTraceEvent]:
        """Continue to quiescence, returning the events produced by this call."""
        with self._lock:
            session = self._require_session()
            before = len(session.trace)
            self.control("continue")
            return list(session.trace)[before:]

    @property
    def status(self) -> str:
        with self._lock:
            return IDLE if self._session is None else self._session.status

    @property
    def trace(self) -> Trace:
        with self._lock:
            return self._require_session().trace

    def fetch(
        self,
        chrono_range: Optional[tuple[int, int]] = None,
        query: Optional[FilterQuery] = None,
    ) -> list[ActualTraceEvent]:
        """Retrospective query over the stored full trace."""
        with self._lock:
            session = self._require_session()
            out = []
            for event in session.trace:
                if chrono_range is not None and not chrono_range[0] <= event.chrono <= chrono_range[1]:
                    continue
                if query is not None and not query.matches(event):
                    continue
                out.append(event)
            return out

    def state_snapshot(self, chrono: int) -> Optional[dict[str, Any]]:
        """Full engine-state view for one chrono (an extension of the trace)."""
        with self._lock:
            session = self._require_session()
            if not 1 <= chrono <= len(session.snapshots):
                return None
            state = session.snapshots[chrono - 1]
            return {
                "goal": [render_constraint(state.bics.normalize_constraint(c)) for c in state.goal.items()],
                "udcs": [
                    {"id": ic.id, "constraint": render_constraint(state.bics.normalize_constraint(ic.constraint))}
                    for ic in state.store
                ],
                "bics": state.bics.render(),
                "next_id": state.next_id,
                "consistent": state.bics.consistent,
            }

    def export_xml(self) -> str:
        with self._lock:
            return to_xml(self._require_session().trace)

    def session_info(self) -> dict[str, Any]:
        with self._lock:
            if self._session is None:
                return {"status": IDLE}
            session = self._session
            return {
                "status": session.status,
                "events": len(session.trace),
                "program": session.program_text,
                "query": session.query_text,
                "step_by_step": session.step_by_step,
            }
