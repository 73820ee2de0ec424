"""Command-line entry point: ``skelmad run|reduce|skel|bench|check``."""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click

from . import checks, kernel, lsc
from .machine import MAD, SMAD, Machine, check_bounds
from .skeleton import mark_skeleton, split, white_size
from .syntax import from_store, show, to_store
from .terms import ABS, ParseError, Term, parse, to_text

EXIT_ERROR = 1
EXIT_FUEL = 3

BENCH_COLUMNS = [
    "n",
    "machine",
    "beta",
    "sk",
    "ss",
    "sea1",
    "sea2",
    "sea3",
    "finalEnvLen",
    "maxStateSize",
    "inkSpaceCalculus",
    "wallNanos",
]
MAD_BENCH_LIMIT = 20


def _load(path: str) -> Term:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse(text)
    except ParseError as exc:
        raise click.ClickException(f"parse error: {exc}") from exc


def _closed(term: Term) -> None:
    free = term.store.free_decls(term.root)
    if free:
        name = sorted(term.store.name[d] for d in free)[0]
        raise click.ClickException(f"open term: free variable {name}")


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Call-by-need and skeletal call-by-need workbench."""


@main.command()
@click.option("--machine", "variant", type=click.Choice(["mad", "smad"], case_sensitive=False), default="smad", show_default=True)
@click.option("--trace", is_flag=True, help="Print one row per transition.")
@click.option("--audit", is_flag=True, help="Check the state invariants after every transition.")
@click.option("--fuel", type=int, default=10**7, show_default=True, help="Maximal number of transitions.")
@click.option("--backend", type=click.Choice(["reference", "python", "cython"]), default="reference", show_default=True,
              help="reference runs the full machine; the others run the counting kernels.")
@click.option("--ascii", "ascii_", is_flag=True, help="Print \\ instead of λ.")
@click.argument("file", type=click.Path(dir_okay=False))
def run(variant: str, trace: bool, audit: bool, fuel: int, backend: str, ascii_: bool, file: str) -> None:
    """Run an abstract machine on the closed term in FILE."""
    term = _load(file)
    _closed(term)
    variant = variant.upper()
    unicode = not ascii_
    if backend != "reference":
        if trace or audit:
            raise click.ClickException("--trace and --audit need the reference backend")
        if backend not in kernel.available_backends():
            raise click.ClickException(f"backend {backend} is not built")
        fast = kernel.run_fast(term, variant, fuel, backend)
        stats, result = fast.stats, show(fast.result, unicode)
    else:
        m = Machine(term, variant=variant)
        if trace:
            click.echo(f"{'':6}{m.render_row(unicode)}")

        def row(label: str, mach: Machine) -> None:
            click.echo(f"{label:<6}{mach.render_row(unicode)}")

        try:
            stats = m.run(fuel, audit=audit, on_step=row if trace else None)
        except AssertionError as exc:
            raise click.ClickException(f"audit failed: {exc}") from exc
        result = to_text(m.store, m.code, unicode)
    c = stats.counts
    keys = ("beta", "sk", "ss", "sea1", "sea2", "sea3") if variant == SMAD else ("beta", "sub", "sea1", "sea2", "sea3")
    for k in keys:
        click.echo(f"{k}={c[k]}")
    click.echo(f"finalEnvLen={stats.final_env_len}")
    click.echo(f"maxStateSize={stats.max_state_size}")
    click.echo(f"wallNanos={stats.wall_nanos}")
    if stats.exhausted:
        click.echo(f"fuel exhausted after {fuel} transitions", err=True)
        sys.exit(EXIT_FUEL)
    click.echo(f"result={result}")
    if audit:
        for b in check_bounds(stats, stats.initial_size, variant):
            click.echo(f"bound violated: {b}", err=True)


@main.command()
@click.option("--strategy", type=click.Choice(list(lsc.STRATEGIES)), default=lsc.SKNEED, show_default=True)
@click.option("--trace", is_flag=True, help="Print every step.")
@click.option("--fuel", type=int, default=10**6, show_default=True)
@click.option("--ascii", "ascii_", is_flag=True)
@click.argument("file", type=click.Path(dir_okay=False))
def reduce(strategy: str, trace: bool, fuel: int, ascii_: bool, file: str) -> None:
    """Reduce the term in FILE with a calculus strategy."""
    term = _load(file)
    t = from_store(term.store, term.root)
    unicode = not ascii_
    ev = lsc.evaluate(t, strategy, fuel=fuel, trace=trace)
    if trace:
        click.echo(f"{'':8}{show(t, unicode)}")
        for label, u in ev.trace or []:
            click.echo(f"→_{label:<6}{show(u, unicode)}")
    for label in ("dB", "lsnd", "sk", "ss"):
        if strategy == lsc.NEED and label in ("sk", "ss"):
            continue
        if strategy == lsc.SKNEED and label == "lsnd":
            continue
        click.echo(f"{label}={ev.stats.counts.get(label, 0)}")
    click.echo(f"inkSpace={ev.stats.ink_space}")
    if ev.stats.exhausted:
        click.echo(f"fuel exhausted after {fuel} steps", err=True)
        sys.exit(EXIT_FUEL)
    click.echo(f"result={show(ev.final, unicode)}")


@main.command()
@click.option("--ascii", "ascii_", is_flag=True)
@click.argument("file", type=click.Path(dir_okay=False))
def skel(ascii_: bool, file: str) -> None:
    """Print the skeleton and flesh of the abstraction in FILE."""
    term = _load(file)
    s, v = term.store, term.root
    if s.kind[v] != ABS:
        raise click.ClickException("expected an abstraction")
    unicode = not ascii_
    steps = mark_skeleton(s, v)
    ws = white_size(s, v)
    dec = split(s, v)
    click.echo(f"skeleton={to_text(s, dec.skeleton, unicode)}")
    for d, body in dec.flesh:
        click.echo(f"flesh {s.name[d]}={to_text(s, body, unicode)}")
    click.echo(f"whiteSize={ws}")
    click.echo(f"steps={steps}")


def _family_range(spec: str) -> range:
    try:
        lo, _, hi = spec.partition("..")
        lo_n, hi_n = int(lo), int(hi or lo)
    except ValueError as exc:
        raise click.BadParameter(f"expected NMIN..NMAX, got {spec!r}") from exc
    if lo_n < 0 or hi_n < lo_n:
        raise click.BadParameter(f"empty family range {spec!r}")
    return range(lo_n, hi_n + 1)


def bench_rows(ns, machines, ink: bool = False, backend: str | None = None):
    """One row per (n, machine) on the family, in order."""
    for n in ns:
        t = lsc.family_term(n)
        store, root = to_store(t)
        flat = kernel.flatten(Term(store, root))
        for variant in machines:
            fast = kernel.run_fast(flat, variant, backend=backend)
            st = fast.stats
            c = st.counts
            ink_space = ""
            if ink:
                strategy = lsc.SKNEED if variant == SMAD else lsc.NEED
                ink_space = lsc.evaluate(t, strategy).stats.ink_space
            yield {
                "n": n,
                "machine": variant,
                "beta": c["beta"],
                "sk": c["sk"],
                # plain runs report their substitutions in the ss column
                "ss": c["ss"] if variant == SMAD else c["sub"],
                "sea1": c["sea1"],
                "sea2": c["sea2"],
                "sea3": c["sea3"],
                "finalEnvLen": st.final_env_len,
                "maxStateSize": st.max_state_size,
                "inkSpaceCalculus": ink_space,
                "wallNanos": st.wall_nanos,
            }


@main.command()
@click.option("--family", "family", default="0..10", show_default=True, help="Range NMIN..NMAX.")
@click.option("--machines", default="mad,smad", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="-", show_default=True)
@click.option("--ink", is_flag=True, help="Also measure calculus ink space (slow for the plain strategy).")
@click.option("--force", is_flag=True, help=f"Allow plain runs above n={MAD_BENCH_LIMIT}.")
@click.option("--backend", type=click.Choice(["python", "cython"]), default=None)
def bench(family: str, machines: str, out: str, ink: bool, force: bool, backend: str | None) -> None:
    """Run both machines on the family and write a CSV table."""
    ns = _family_range(family)
    chosen = []
    for name in machines.split(","):
        name = name.strip().upper()
        if name not in (MAD, SMAD):
            raise click.BadParameter(f"unknown machine {name!r}")
        chosen.append(name)
    if MAD in chosen and ns[-1] > MAD_BENCH_LIMIT and not force:
        raise click.ClickException(f"plain runs grow exponentially; refusing n>{MAD_BENCH_LIMIT} without --force")
    if backend and backend not in kernel.available_backends():
        raise click.ClickException(f"backend {backend} is not built")
    with click.open_file(out, "w", encoding="utf-8", lazy=False) as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in bench_rows(ns, chosen, ink, backend):
            w.writerow(row)


@main.command()
@click.option("--suite", type=click.Choice(["all", *checks.SUITES]), default="all", show_default=True)
@click.option("--cases", type=int, default=None, help="Sample count for the randomized suites.")
@click.option("--seed", type=int, default=checks.DEFAULT_SEED, show_default=True)
@click.option("--max-size", type=int, default=None, help="Maximal size of generated terms.")
@click.option("--verbose", "-v", is_flag=True, help="Also print notes.")
def check(suite: str, cases: int | None, seed: int, max_size: int | None, verbose: bool) -> None:
    """Run the cross-checking suites and print a summary per suite."""
    names = checks.SUITES if suite == "all" else (suite,)
    ok = True
    for name in names:
        res = checks.run_suite(name, seed, cases, max_size)
        click.echo(res.summary())
        for f in res.failures:
            click.echo(f"  {f}")
        if verbose:
            for note in res.notes:
                click.echo(f"  note: {note}")
        ok = ok and res.ok
    sys.exit(0 if ok else EXIT_ERROR)


if __name__ == "__main__":
    main()
