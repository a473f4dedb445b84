"""Incremental bounded-memory evaluation of specifications over event traces."""

from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Any, Deque, Dict, FrozenSet, List, Mapping, Optional, Set, Tuple, Union

from src.analysis import AnalysisResult, analyze
from src.config import settings
from src.exceptions import (
    DoubleFinish, EngineError, EvaluationError, EventAfterFinish, IllDefinedSpecification,
    MissingInput, NotEfficientlyMonitorable, TypeMismatch, UnknownInput, WindowViolation,
    WriteOnceViolation,
)
from src.functions import apply_partial
from src.logger import app_logger
from src.syntax import App, At, Expr, Leaf, Now, Output, Specification, may_fail, type_check
from src.values import Value


@dataclass(frozen=True)
class Resolved:
    value: Value


@dataclass(frozen=True)
class Pending:
    """Unresolved cell holding the partially simplified defining expression."""
    residual: Expr


@dataclass(frozen=True)
class Blocked:
    """Evaluation that needs the listed (stream, instant) cells first."""
    demands: FrozenSet[Tuple[str, int]]
    residual: Expr


# Resolved cells store their Value directly
Cell = Union[Value, Pending]
Outcome = Union[Value, Blocked]


class Instant:
    """One column of the evaluation matrix: a cell per declared stream."""

    __slots__ = ("index", "cells", "layout")

    def __init__(self, index: int, cells: List[Cell], layout: Mapping[str, int]):
        self.index = index
        self.cells = cells
        self.layout = layout

    def cell(self, name: str) -> Union[Resolved, Pending]:
        cell = self.cells[self.layout[name]]
        return Resolved(cell) if isinstance(cell, Value) else cell

    def resolve(self, position: int, value: Value) -> None:
        if isinstance(self.cells[position], Value):
            raise WriteOnceViolation(f"cell {position} of instant {self.index} is already resolved")
        self.cells[position] = value

    @property
    def complete(self) -> bool:
        return all(isinstance(cell, Value) for cell in self.cells)


@dataclass(frozen=True)
class OutputRow:
    """Values of every output stream at one instant, in declaration order."""
    index: int
    values: Dict[str, Value] = field(hash=False)

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"instant": self.index}
        row.update((name, value.to_json()) for name, value in self.values.items())
        return row


@dataclass
class EngineStats:
    events: int = 0
    rows: int = 0
    max_retained: int = 0
    max_lookahead: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def validate_event(spec: Specification, event: Mapping[str, Value]) -> Dict[str, Value]:
    """Check that ``event`` binds exactly the declared inputs with the right types."""
    declared = {decl.name: decl.type for decl in spec.inputs}
    for name in event:
        if name not in declared:
            raise UnknownInput(f"event field {name} is not a declared input", {"input": name})
    for name, expected in declared.items():
        if name not in event:
            raise MissingInput(f"event lacks input {name}", {"input": name})
        value = event[name]
        found = value.type if isinstance(value, Value) else type(value).__name__
        if found != expected:
            raise TypeMismatch(f"input {name} expects {expected}, got {found}",
                               {"input": name, "expected": str(expected), "found": str(found)})
    return dict(event)


class MonitorEngine:
    """Online evaluator: a bounded past, the focus instant and the lookahead."""

    def __init__(self, spec: Specification, analysis: Optional[AnalysisResult] = None,
                 simplify: Optional[bool] = None):
        if not spec.typed:
            spec = type_check(spec)
        analysis = analysis or analyze(spec)
        if not analysis.well_defined:
            raise IllDefinedSpecification(f"zero-weight cycle: {analysis.zero_cycle}",
                                          {"cycle": str(analysis.zero_cycle)})
        if not analysis.efficiently_monitorable:
            cycle = ", ".join(str(e) for e in analysis.positive_cycle)
            app_logger.warning(f"refusing specification with positive cycle {cycle}")
            raise NotEfficientlyMonitorable(f"positive cycle: {cycle}", {"cycle": cycle})

        self.spec = spec
        self.analysis = analysis
        self.simplify = settings.simplify if simplify is None else simplify
        self.layout: Dict[str, int] = {name: i for i, name in enumerate(spec.names)}
        self.names = spec.names
        self.input_slots = [(self.layout[d.name], d.name) for d in spec.inputs]
        self.output_slots = [(self.layout[d.name], d) for d in spec.outputs]
        self.resolution_order = [
            self.layout[name] for name in analysis.zero_order
            if isinstance(spec.decl(name), Output)
        ]
        self.past: Deque[Tuple[Value, ...]] = deque(maxlen=analysis.window)
        self.lookahead: Deque[Instant] = deque()
        self.focus = 0
        self.inputs_consumed = 0
        self.end_of_input = False
        self._stats = EngineStats()
        self._emitted: List[OutputRow] = []
        self._progress = 0
        self._stalled: Set[Tuple[int, int]] = set()
        app_logger.info(
            f"engine ready: {len(spec.decls)} streams, window {analysis.window}, "
            f"simplifiers {'on' if self.simplify else 'off'}"
        )

    @property
    def window(self) -> int:
        return self.analysis.window

    @property
    def trace_length(self) -> Optional[int]:
        return self.inputs_consumed if self.end_of_input else None

    # Events

    def push_event(self, event: Mapping[str, Value]) -> List[OutputRow]:
        """Materialize the next instant and return every row it completes."""
        if self.end_of_input:
            raise EventAfterFinish("event pushed after end of input")
        values = validate_event(self.spec, event)
        cells: List[Cell] = [None] * len(self.names)
        for position, name in self.input_slots:
            cells[position] = values[name]
        for position, decl in self.output_slots:
            cells[position] = Pending(decl.body)
        self.lookahead.append(Instant(self.inputs_consumed, cells, self.layout))
        self.inputs_consumed += 1
        self._changed()
        self._stats.events += 1
        self._record_memory()
        while self.step_focus():
            pass
        return self._take_rows()

    def finish(self) -> List[OutputRow]:
        """Mark end of input and resolve everything still pending."""
        if self.end_of_input:
            raise DoubleFinish("finish called twice")
        self.end_of_input = True
        self._changed()
        while self.step_focus():
            pass
        if self.lookahead:
            raise EngineError(f"instant {self.focus} stayed unresolved after end of input")
        app_logger.info(f"engine finished: {self._stats.to_dict()}")
        return self._take_rows()

    def stats(self) -> EngineStats:
        return EngineStats(**self._stats.to_dict())

    def _take_rows(self) -> List[OutputRow]:
        rows, self._emitted = self._emitted, []
        return rows

    def _record_memory(self) -> None:
        retained = len(self.past) + len(self.lookahead)
        self._stats.max_retained = max(self._stats.max_retained, retained)
        self._stats.max_lookahead = max(self._stats.max_lookahead, len(self.lookahead) - 1)

    # Focus

    def step_focus(self) -> bool:
        """Resolve the focus instant; on success emit its row and advance."""
        if not self.lookahead:
            return False
        instant = self.lookahead[0]
        complete = True
        for position in self.resolution_order:
            if not isinstance(instant.cells[position], Value):
                if isinstance(self._force(position, instant.index), Blocked):
                    complete = False
        if not complete:
            return False
        values = {decl.name: instant.cells[position] for position, decl in self.output_slots}
        self.lookahead.popleft()
        self.past.append(tuple(instant.cells))
        self.focus += 1
        self._emitted.append(OutputRow(instant.index, values))
        self._stats.rows += 1
        return True

    # Evaluation

    def evaluate_at(self, expr: Expr, instant: int) -> Union[Resolved, Blocked]:
        """Evaluate ``expr`` at ``instant`` against the current matrix."""
        if instant < self.focus + self.analysis.min_back_ref:
            raise WindowViolation(f"instant {instant} is outside the retention window (focus {self.focus})")
        while True:
            progress = self._progress
            outcome = self._eval(expr, instant)
            if not isinstance(outcome, Blocked):
                return Resolved(outcome)
            for key in self._forceable(outcome):
                self._force(*key)
            if self._progress == progress:
                return outcome

    def _changed(self) -> None:
        """Something new is known; every stalled cell may be worth another try."""
        self._progress += 1
        self._stalled = set()

    def _forceable(self, outcome: Blocked) -> List[Tuple[int, int]]:
        """Pending materialized cells ``outcome`` waits on that were not tried since the last change."""
        keys = []
        for stream, index in sorted(outcome.demands, key=lambda d: (d[1], self.layout[d[0]])):
            if not self.focus <= index < self.inputs_consumed:
                continue
            key = (self.layout[stream], index)
            cell = self.lookahead[index - self.focus].cells[key[0]]
            if not isinstance(cell, Value) and key not in self._stalled:
                keys.append(key)
        return keys

    def _force(self, position: int, index: int) -> Outcome:
        """Resolve one cell, forcing the pending cells it waits on first.

        Works off an explicit stack so long chains of pending cells never
        deepen the interpreter stack.
        """
        root = (position, index)
        stack = [root]
        on_stack = {root}
        outcome: Outcome
        while stack:
            key = stack[-1]
            outcome = self._attempt(*key)
            if isinstance(outcome, Blocked):
                waiting = [k for k in self._forceable(outcome) if k not in on_stack]
                if waiting:
                    stack.extend(waiting)
                    on_stack.update(waiting)
                    continue
                self._stalled.add(key)
            stack.pop()
            on_stack.discard(key)
        return outcome

    def _attempt(self, position: int, index: int) -> Outcome:
        instant = self.lookahead[index - self.focus]
        cell = instant.cells[position]
        if isinstance(cell, Value):
            return cell
        name = self.names[position]
        if (position, index) in self._stalled:
            return Blocked(frozenset(), cell.residual)
        try:
            outcome = self._eval(cell.residual, index)
        except EvaluationError as e:
            if e.stream is None:
                raise e.at(name, index) from None
            raise
        if isinstance(outcome, Blocked):
            instant.cells[position] = Pending(outcome.residual)
        else:
            instant.resolve(position, outcome)
            self._changed()
        return outcome

    def _access(self, stream: str, target: int, current: int,
                default: Optional[Expr], node: Expr) -> Outcome:
        if target < 0 or (self.end_of_input and target >= self.inputs_consumed):
            return self._eval(default, current)
        if target < self.focus:
            back = self.focus - target
            if back > len(self.past):
                raise WindowViolation(f"{stream}@{target} was evicted (focus {self.focus})")
            return self.past[-back][self.layout[stream]]
        if target < self.inputs_consumed:
            cell = self.lookahead[target - self.focus].cells[self.layout[stream]]
            if isinstance(cell, Value):
                return cell
        return Blocked(frozenset({(stream, target)}), node)

    def _eval(self, expr: Expr, current: int) -> Outcome:
        if isinstance(expr, Leaf):
            return expr.value
        if isinstance(expr, Now):
            return self._access(expr.stream, current, current, None, expr)
        if isinstance(expr, At):
            return self._access(expr.stream, current + expr.offset, current, expr.default, expr)

        outcomes = [self._eval(arg, current) for arg in expr.args]
        values = [o if isinstance(o, Value) else None for o in outcomes]
        blocked = [o for o in outcomes if isinstance(o, Blocked)]
        # simplifiers never drop an argument that could still raise
        if not blocked or (self.simplify and not any(may_fail(o.residual) for o in blocked)):
            value = apply_partial(expr.symbol, values)
            if value is not None:
                return value
        demands: FrozenSet[Tuple[str, int]] = frozenset().union(*(o.demands for o in blocked))
        residual = App(expr.name, tuple(
            Leaf(o) if isinstance(o, Value) else o.residual for o in outcomes), expr.symbol)
        return Blocked(demands, residual)


def new_engine(spec: Specification, analysis: Optional[AnalysisResult] = None,
               simplify: Optional[bool] = None) -> MonitorEngine:
    """Create an engine; refuses ill-defined or non-efficiently-monitorable specs."""
    return MonitorEngine(spec, analysis, simplify)


def run_trace(spec: Specification, events, simplify: Optional[bool] = None) -> Tuple[List[OutputRow], EngineStats]:
    """Push a whole trace through a fresh engine."""
    engine = new_engine(spec, simplify=simplify)
    rows: List[OutputRow] = []
    for event in events:
        rows.extend(engine.push_event(event))
    rows.extend(engine.finish())
    return rows, engine.stats()
