"""Command-line front end: batch runs, the protocol server, verification.

Exit codes for ``run``: 0 quiescence, 1 parse error, 2 failure (the
built-in store became inconsistent), 3 budget exhausted.  The transition
budget defaults to 10000 and can be overridden with --budget or the
CHR_TRACE_BUDGET environment variable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import engine as eng
from .driver import Driver, FilterQuery
from .lang import ChrSemanticError, ChrSyntaxError, parse_program, parse_query
from .ossim import core as oscore
from .ossim.fib import fib_spec
from .ossim.robots import robots_spec
from .rebuild import check_faithful
from .tracer import Trace, to_xml, trace_run
from .wire import LineProtocolServer, make_http_server, serve_forever_in_thread

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_FAILED = 2
EXIT_BUDGET = 3


def _format_pretty(trace: Trace) -> str:
    """The functional-form listing: one block per event, empty attributes omitted."""
    blocks = []
    for event in trace:
        head = f"{event.chrono:>2}    {event.kind:<13}"
        indent = " " * len(head)
        parts = []
        for name, value in event.attributes.items():
            if name == "hind":
                parts.append(f"hind({value})")
            elif str(value):
                parts.append(f"{name}(({value}))")
        if not parts:
            blocks.append(head.rstrip())
            continue
        lines = [head + parts[0]] + [indent + p for p in parts[1:]]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _format_jsonl(trace: Trace) -> str:
    return "".join(
        json.dumps({"chrono": e.chrono, "kind": e.kind, "attributes": dict(e.attributes)}) + "\n"
        for e in trace
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")


budget_option = click.option(
    "--budget",
    type=int,
    default=eng.DEFAULT_BUDGET,
    envvar="CHR_TRACE_BUDGET",
    show_default=True,
    help="maximum number of engine transitions",
)


@click.group()
def main():
    """CHR engine with a generic tracer, trace driver and rebuilder."""


@main.command("run")
@click.argument("program", type=click.Path(exists=True, path_type=Path))
@click.option("--query", "-q", default="", help="query constraints, comma separated")
@click.option("--output", "-f", type=click.Choice(["xml", "jsonl", "pretty"]), default="pretty", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="write the trace to a file")
@budget_option
@click.option("--step", is_flag=True, help="interactive stepping: Enter=step, f=filter, q=quit")
def cmd_run(program: Path, query: str, output: str, out: Path | None, budget: int, step: bool):
    """Execute PROGRAM against a query and emit its trace."""
    try:
        parsed_program = parse_program(program.read_text(encoding="utf-8"))
        parsed_query = parse_query(query)
    except (ChrSyntaxError, ChrSemanticError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)

    if step:
        sys.exit(_interactive(parsed_program, parsed_query, budget))

    exit_code = EXIT_OK
    try:
        trace, state = trace_run(parsed_program, parsed_query, budget=budget)
        if not state.bics.consistent:
            exit_code = EXIT_FAILED
    except eng.BudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)

    if output == "xml":
        _emit(to_xml(trace), out)
    elif output == "jsonl":
        _emit(_format_jsonl(trace), out)
    else:
        _emit(_format_pretty(trace), out)
    sys.exit(exit_code)


def _interactive(program, query, budget: int) -> int:
    driver = Driver()
    driver.load_parsed(program, query, step_by_step=True, budget=budget)
    display = FilterQuery()
    click.echo("interactive trace: Enter=step  f=filter kinds  q=quit", err=True)
    while True:
        try:
            command = input()
        except EOFError:
            return EXIT_OK
        if command == "q":
            return EXIT_OK
        if command == "f":
            raw = input("kinds (comma separated, empty for all): ").strip()
            display = FilterQuery(kinds=frozenset(k.strip() for k in raw.split(",")) if raw else None)
            continue
        try:
            event = driver.new_step()
        except eng.BudgetExceeded as exc:
            click.echo(f"budget exceeded: {exc}", err=True)
            return EXIT_BUDGET
        if event is None:
            click.echo("(quiescent)", err=True)
            return EXIT_FAILED if driver.status == "failed" else EXIT_OK
        if display.matches(event):
            rendered = " ".join(
                f"{k}(({v}))" if k != "hind" else f"hind({v})" for k, v in event.attributes.items() if str(v)
            )
            click.echo(f"{event.chrono:>2} {event.kind:<13} {rendered}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8737, show_default=True, help="HTTP port for the JSON protocol")
@click.option("--tcp-port", type=int, default=None, help="also serve newline-delimited JSON over TCP")
@click.option("--ui", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None,
              help="serve a built analyzer UI from this directory")
def cmd_serve(host: str, port: int, tcp_port: int | None, ui: Path | None):
    """Host the driver protocol for remote analyzers (see docs/protocol.md)."""
    driver = Driver()
    try:
        http_server = make_http_server(driver, host, port, ui_dir=ui)
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(1)
    if tcp_port is not None:
        tcp_server = LineProtocolServer(driver, host, tcp_port)
        serve_forever_in_thread(tcp_server)
        click.echo(f"tcp protocol on {host}:{tcp_server.server_address[1]}", err=True)
    click.echo(f"http protocol on http://{host}:{http_server.server_address[1]}/rpc", err=True)
    try:
        http_server.serve_forever()
    except KeyboardInterrupt:
        pass


@main.command("replay")
@click.argument("trace_file", type=click.Path(exists=True, path_type=Path))
def cmd_replay(trace_file: Path):
    """Rebuild the virtual states ⟨Q, U, B⟩ from a chrv XML trace file."""
    from .lang import render_constraints
    from .rebuild import rebuild
    from .tracer import ChronoError, SchemaError, from_xml

    try:
        trace = from_xml(trace_file.read_text(encoding="utf-8"))
    except (SchemaError, ChronoError) as exc:
        click.echo(f"invalid trace: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    for event, state in zip(trace, rebuild(trace)):
        goal = render_constraints(state.goal or [])
        udcs = render_constraints(state.udcs or [])
        bics = render_constraints(state.bics or [])
        click.echo(f"{event.chrono:>3} {event.kind:<13} Q=[{goal}]  U=[{udcs}]  B=[{bics}]")


@main.command("verify")
@click.argument("program", type=click.Path(exists=True, path_type=Path))
@click.option("--query", "-q", default="", help="query constraints, comma separated")
@budget_option
def cmd_verify(program: Path, query: str, budget: int):
    """Check trace faithfulness: rebuild the trace and compare with the engine."""
    try:
        parsed_program = parse_program(program.read_text(encoding="utf-8"))
        parsed_query = parse_query(query)
    except (ChrSyntaxError, ChrSemanticError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        report = check_faithful(parsed_program, parsed_query, budget=budget)
    except eng.BudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    click.echo(report.summary())
    sys.exit(EXIT_OK if report.faithful else EXIT_FAILED)


@main.command("ossim")
@click.argument("spec_name", metavar="SPEC", type=click.Choice(["fib", "robots"]))
@click.option("--script", type=click.Path(exists=True, path_type=Path), default=None,
              help="action script: one action per line, name then arguments")
@click.option("--output", "-f", type=click.Choice(["jsonl", "xml", "pretty"]), default="jsonl", show_default=True)
@click.option("--steps", type=int, default=5, show_default=True, help="fib only: steps when no script is given")
def cmd_ossim(spec_name: str, script: Path | None, output: str, steps: int):
    """Run a bundled observational-semantics spec as an independent oracle."""
    spec = fib_spec() if spec_name == "fib" else robots_spec()
    if script is not None:
        actions = []
        for line in script.read_text(encoding="utf-8").splitlines():
            line = line.split("%")[0].strip()
            if not line:
                continue
            name, *args = line.split()
            actions.append((name, tuple(args)))
    elif spec_name == "fib":
        actions = [("mg", ())] * steps
    else:
        from .ossim.robots import REFERENCE_TRACE, script_from_trace

        actions = script_from_trace(REFERENCE_TRACE, spec)

    result = oscore.run_script(spec, actions)
    events = oscore.extraction(result.situation)
    if output == "xml":
        lines = ['<?xml version="1.0" encoding="UTF-8"?>', f'<ostrace spec="{spec.name}">']
        for e in events:
            attrs = "".join(f"<attr>{a}</attr>" for a in e.attributes)
            lines.append(f'\t<event chrono="{e.chrono}"><{e.kind}>{attrs}</{e.kind}></event>')
        lines.append("</ostrace>")
        click.echo("\n".join(lines))
    elif output == "pretty":
        for e in events:
            click.echo(f"{e.chrono:>2} {e.kind:<9} " + " ".join(str(a) for a in e.attributes))
    else:
        for e in events:
            click.echo(json.dumps({"chrono": e.chrono, "kind": e.kind, "attributes": list(e.attributes)}))
    if not result.completed:
        click.echo(f"stopped at action {result.failed_index}: {result.failure}", err=True)
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    main()
