"""Reference evaluator: strict, memoized evaluation over the whole trace."""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from src.analysis import build_graph, check_well_defined
from src.engine import OutputRow, validate_event
from src.exceptions import EvaluationError, IllDefinedSpecification
from src.functions import apply_total
from src.logger import app_logger
from src.syntax import At, Expr, Leaf, Now, Output, Specification, free_streams, type_check
from src.values import Value

Cell = Tuple[str, int]


class _Oracle:
    def __init__(self, spec: Specification, events: List[Dict[str, Value]]):
        self.spec = spec
        self.length = len(events)
        self.table: Dict[Cell, Value] = {}
        for j, event in enumerate(events):
            for name, value in event.items():
                self.table[(name, j)] = value
        self.reads = {
            decl.name: sorted(free_streams(decl.body)) for decl in spec.outputs
        }

    def _dependencies(self, cell: Cell) -> List[Cell]:
        name, j = cell
        return [
            (stream, j + offset) for stream, offset in self.reads[name]
            if 0 <= j + offset < self.length
        ]

    def force(self, root: Cell) -> Value:
        """Compute ``root`` bottom-up with an explicit stack."""
        stack = [root]
        expanded: Set[Cell] = set()
        while stack:
            cell = stack[-1]
            if cell in self.table:
                stack.pop()
                continue
            missing = [dep for dep in self._dependencies(cell) if dep not in self.table]
            if missing:
                if cell in expanded:
                    raise IllDefinedSpecification(f"{cell[0]}@{cell[1]} depends on itself")
                expanded.add(cell)
                stack.extend(missing)
                continue
            stack.pop()
            name, j = cell
            try:
                self.table[cell] = self.evaluate(self.spec.decl(name).body, j)
            except EvaluationError as e:
                raise e.at(name, j) from None
        return self.table[root]

    def evaluate(self, expr: Expr, j: int) -> Value:
        if isinstance(expr, Leaf):
            return expr.value
        if isinstance(expr, Now):
            return self.table[(expr.stream, j)]
        if isinstance(expr, At):
            target = j + expr.offset
            if 0 <= target < self.length:
                return self.table[(expr.stream, target)]
            return self.evaluate(expr.default, j)
        return apply_total(expr.symbol, [self.evaluate(arg, j) for arg in expr.args])


def oracle_evaluate(
    spec: Specification,
    trace: Iterable[Mapping[str, Value]],
    order: Optional[Sequence[str]] = None,
    descending: bool = False,
) -> List[OutputRow]:
    """Rows of every output at every instant, by the defining equations.

    ``order`` picks the output streams to force first and ``descending`` walks
    instants from the end; the result does not depend on either.
    """
    if not spec.typed:
        spec = type_check(spec)
    witness = check_well_defined(build_graph(spec))
    if witness is not None:
        raise IllDefinedSpecification(f"zero-weight cycle: {witness}", {"cycle": str(witness)})

    events = [validate_event(spec, event) for event in trace]
    oracle = _Oracle(spec, events)
    outputs = [decl.name for decl in spec.outputs]
    roots = list(order) if order is not None else outputs
    instants = range(len(events) - 1, -1, -1) if descending else range(len(events))
    for name in roots:
        if not isinstance(spec.decl(name), Output):
            continue
        for j in instants:
            oracle.force((name, j))
    for name in outputs:
        for j in instants:
            oracle.force((name, j))

    app_logger.debug(f"oracle evaluated {len(outputs)} outputs over {len(events)} instants")
    return [OutputRow(j, {name: oracle.table[(name, j)] for name in outputs}) for j in range(len(events))]
