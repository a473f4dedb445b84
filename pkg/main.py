"""Command-line entry point for the Lola stream monitor."""

import argparse
import json
import queue
import sys
import threading
from contextlib import ExitStack
from pathlib import Path
from typing import Iterable, List, Literal, Optional, TextIO

from pydantic import BaseModel, Field, ValidationError, model_validator

from src.analysis import analyze
from src.config import settings
from src.engine import OutputRow, new_engine
from src.exceptions import (
    ConfigurationError, IllDefinedSpecification, InputError, LolaError, NotEfficientlyMonitorable,
)
from src.logger import app_logger, setup_logging
from src.oracle import oracle_evaluate
from src.stdlib import EXPERIMENT_FAMILIES, compile_file
from src.syntax import Specification, render_spec
from src.trace_io import EventDecoder, load_trace, write_row

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ILL_DEFINED = 2
EXIT_NOT_MONITORABLE = 3

Mode = Literal["analyze", "expand", "run", "oracle-run", "bench", "experiments"]


class RunConfig(BaseModel):
    """One CLI invocation."""
    mode: Mode
    spec_path: Optional[Path] = None
    libs: List[str] = Field(default_factory=list)
    include_stdlib: bool = True
    max_depth: Optional[int] = Field(default=None, ge=1)
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    simplify: bool = True
    stats: bool = False
    stats_json: Optional[Path] = None
    dot_path: Optional[Path] = None
    family: str = "boolean_period_width"
    ns: List[int] = Field(default_factory=lambda: [1, 10, 100])
    lengths: List[int] = Field(default_factory=lambda: [10_000])
    csv_path: Optional[Path] = None
    plot_path: Optional[Path] = None

    @model_validator(mode="after")
    def check_mode(self) -> "RunConfig":
        if self.mode != "experiments" and self.spec_path is None:
            raise ValueError(f"{self.mode} needs a specification file")
        if self.mode in ("oracle-run", "bench") and self.input_path is None:
            raise ValueError(f"{self.mode} needs --input")
        if self.mode == "bench" and self.stats_json is None:
            raise ValueError("bench needs --stats-json")
        if self.mode == "experiments" and self.family not in EXPERIMENT_FAMILIES:
            raise ValueError(f"unknown experiment family {self.family}")
        return self


_END = object()


def _read_events(source: TextIO, decoder: EventDecoder, events: queue.Queue) -> None:
    """Reader thread: decoded events, then _END, or the first error."""
    try:
        for number, line in enumerate(source, start=1):
            if line.strip():
                events.put(decoder.decode(line, number))
    except LolaError as e:
        events.put(e)
        return
    except (OSError, UnicodeDecodeError) as e:
        events.put(InputError(f"cannot read input: {str(e)}"))
        return
    events.put(_END)


class MonitorApp:
    """Wires the frontend, analysis, engine and trace I/O for one command."""

    def __init__(self, config: RunConfig, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.config = config
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def compile(self) -> Specification:
        return compile_file(
            self.config.spec_path,
            libs=self.config.libs,
            include_stdlib=self.config.include_stdlib,
            max_depth=self.config.max_depth,
        )

    def execute(self) -> int:
        handlers = {
            "analyze": self.analyze,
            "expand": self.expand,
            "run": self.run,
            "oracle-run": self.oracle_run,
            "bench": self.bench,
            "experiments": self.experiments,
        }
        return handlers[self.config.mode]()

    def _emit(self, rows: Iterable[OutputRow], sink: TextIO) -> None:
        for row in rows:
            sink.write(write_row(row) + "\n")
        sink.flush()

    def analyze(self) -> int:
        result = analyze(self.compile())
        for line in result.describe():
            print(line, file=self.stdout)
        if result.lookahead_bound is not None:
            print(f"lookahead bound: {result.lookahead_bound}", file=self.stdout)
        if self.config.dot_path is not None:
            self.config.dot_path.write_text(result.graph.to_dot(), encoding="utf-8")
        if not result.well_defined:
            print(f"error: zero-weight cycle {result.zero_cycle}", file=self.stderr)
            return EXIT_ILL_DEFINED
        if not result.efficiently_monitorable:
            cycle = ", ".join(str(e) for e in result.positive_cycle)
            print(f"error: positive cycle {cycle}", file=self.stderr)
            return EXIT_NOT_MONITORABLE
        return EXIT_OK

    def expand(self) -> int:
        self.stdout.write(render_spec(self.compile()))
        return EXIT_OK

    def run(self) -> int:
        spec = self.compile()
        engine = new_engine(spec, simplify=self.config.simplify)
        decoder = EventDecoder(spec)
        with ExitStack() as stack:
            source = (stack.enter_context(open(self.config.input_path, "r", encoding="utf-8"))
                      if self.config.input_path else sys.stdin)
            sink = (stack.enter_context(open(self.config.output_path, "w", encoding="utf-8"))
                    if self.config.output_path else self.stdout)
            events: queue.Queue = queue.Queue(maxsize=settings.queue_size)
            reader = threading.Thread(target=_read_events, args=(source, decoder, events), daemon=True)
            reader.start()
            while True:
                item = events.get()
                if item is _END:
                    break
                if isinstance(item, LolaError):
                    raise item
                self._emit(engine.push_event(item), sink)
            self._emit(engine.finish(), sink)
            reader.join()
        if self.config.stats:
            print(json.dumps(engine.stats().to_dict()), file=self.stderr)
        return EXIT_OK

    def oracle_run(self) -> int:
        spec = self.compile()
        rows = oracle_evaluate(spec, load_trace(self.config.input_path, spec))
        if self.config.output_path:
            with open(self.config.output_path, "w", encoding="utf-8") as sink:
                self._emit(rows, sink)
        else:
            self._emit(rows, self.stdout)
        return EXIT_OK

    def bench(self) -> int:
        spec = self.compile()
        engine = new_engine(spec, simplify=self.config.simplify)
        for event in load_trace(self.config.input_path, spec):
            engine.push_event(event)
        engine.finish()
        stats = engine.stats().to_dict()
        self.config.stats_json.write_text(json.dumps(stats) + "\n", encoding="utf-8")
        app_logger.info(f"bench: {stats}")
        return EXIT_OK

    def experiments(self) -> int:
        from src.experiments import plot_sweep, summarize, sweep

        frame = sweep(self.config.family, self.config.ns, self.config.lengths,
                      simplify=self.config.simplify)
        print(frame.to_string(index=False), file=self.stdout)
        for line in summarize(frame):
            print(line, file=self.stdout)
        if self.config.csv_path is not None:
            frame.to_csv(self.config.csv_path, index=False)
        if self.config.plot_path is not None:
            x = "n" if frame["n"].nunique() > 1 else "length"
            plot_sweep(frame, x, "max_retained", self.config.plot_path)
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lib", action="append", default=[], metavar="PATH_OR_BUNDLE",
                        help="Extra template library (repeatable)")
    common.add_argument("--no-stdlib", action="store_true", help="Do not preload the standard bundles")
    common.add_argument("--max-depth", type=int, default=None, help="Template expansion depth limit")
    common.add_argument("--debug", action="store_true", help="Verbose logging on stderr")

    parser = argparse.ArgumentParser(description="Lola stream runtime verification monitor")
    commands = parser.add_subparsers(dest="mode", required=True)

    analyze_cmd = commands.add_parser("analyze", parents=[common], help="Print the dependency analysis")
    analyze_cmd.add_argument("spec")
    analyze_cmd.add_argument("--dot", default=None, help="Write the dependency graph in DOT format")

    expand_cmd = commands.add_parser("expand", parents=[common], help="Print the flat specification")
    expand_cmd.add_argument("spec")

    run_cmd = commands.add_parser("run", parents=[common], help="Monitor a JSON Lines trace online")
    run_cmd.add_argument("spec")
    run_cmd.add_argument("--input", default=None, help="Trace file (default: standard input)")
    run_cmd.add_argument("--output", default=None, help="Row file (default: standard output)")
    run_cmd.add_argument("--no-simplify", action="store_true", help="Disable anticipation")
    run_cmd.add_argument("--stats", action="store_true", help="Print engine statistics on stderr")

    oracle_cmd = commands.add_parser("oracle-run", parents=[common], help="Reference evaluation of a trace")
    oracle_cmd.add_argument("spec")
    oracle_cmd.add_argument("--input", required=True)
    oracle_cmd.add_argument("--output", default=None)

    bench_cmd = commands.add_parser("bench", parents=[common], help="Write engine statistics as JSON")
    bench_cmd.add_argument("spec")
    bench_cmd.add_argument("--input", required=True)
    bench_cmd.add_argument("--stats-json", required=True)
    bench_cmd.add_argument("--no-simplify", action="store_true")

    exp_cmd = commands.add_parser("experiments", parents=[common], help="Memory sweep over synthetic traces")
    exp_cmd.add_argument("--family", default="boolean_period_width", choices=EXPERIMENT_FAMILIES)
    exp_cmd.add_argument("--n", type=int, nargs="+", default=[1, 10, 100])
    exp_cmd.add_argument("--lengths", type=int, nargs="+", default=[10_000])
    exp_cmd.add_argument("--csv", default=None)
    exp_cmd.add_argument("--plot", default=None)
    exp_cmd.add_argument("--no-simplify", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        return RunConfig(
            mode=args.mode,
            spec_path=getattr(args, "spec", None),
            libs=args.lib,
            include_stdlib=settings.include_stdlib and not args.no_stdlib,
            max_depth=args.max_depth,
            input_path=getattr(args, "input", None),
            output_path=getattr(args, "output", None),
            simplify=settings.simplify and not getattr(args, "no_simplify", False),
            stats=getattr(args, "stats", False),
            stats_json=getattr(args, "stats_json", None),
            dot_path=getattr(args, "dot", None),
            family=getattr(args, "family", "boolean_period_width"),
            ns=getattr(args, "n", [1, 10, 100]),
            lengths=getattr(args, "lengths", [10_000]),
            csv_path=getattr(args, "csv", None),
            plot_path=getattr(args, "plot", None),
        )
    except ValidationError as e:
        raise ConfigurationError(f"invalid arguments: {e.errors()[0]['msg']}")


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None,
         stderr: Optional[TextIO] = None) -> int:
    """Main entry point with command line interface; returns the exit code."""
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.debug:
        setup_logging("DEBUG")
    try:
        return MonitorApp(config_from_args(args), stdout, stderr).execute()
    except IllDefinedSpecification as e:
        print(f"error: {e}", file=stderr)
        return EXIT_ILL_DEFINED
    except NotEfficientlyMonitorable as e:
        print(f"error: {e}", file=stderr)
        return EXIT_NOT_MONITORABLE
    except LolaError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_ERROR
    except (OSError, UnicodeError) as e:
        print(f"error: {str(e)}", file=stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        print("\nShutting down...", file=stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
