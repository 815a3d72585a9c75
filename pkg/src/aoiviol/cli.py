"""Command-line front end: run a scenario, write its CSV table and SVG plot."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .dists import parse_distribution
from .experiment import ScenarioError, load_scenario, plot, run
from .sample_path import Discipline, SystemSpec


def _nu_hat(text: str):
    if text in ("exact", "min-rate"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected exact, min-rate or a positive number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError("nu_hat must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aoiviol", description="Age-of-information violation sweeps.")
    p.add_argument("--scenario", required=True, help="scenario TOML file")
    p.add_argument("--out-csv", help="where to write the result table")
    p.add_argument("--out-svg", help="where to write the plot")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--peaks", type=int, help="override peaks per replication")
    p.add_argument("--nu-hat", type=_nu_hat, help="exact, min-rate or a number")
    p.add_argument("--system", choices=[d.value for d in Discipline], help="override the queue discipline")
    p.add_argument("--arrival", help="override the arrival law, e.g. 'exp(1)'")
    p.add_argument("--service", help="override the service law")
    p.add_argument("--replications", type=int, help="override the number of replications")
    p.add_argument("--bound-samples", type=int, help="override the Monte-Carlo sample count of the bound")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    return p


def _apply_overrides(scenario, args):
    system = scenario.system
    if args.system or args.arrival or args.service:
        discipline = Discipline.parse(args.system) if args.system else system.discipline
        service = parse_distribution(args.service) if args.service else system.service
        arrival = parse_distribution(args.arrival) if args.arrival else system.arrival
        if discipline is Discipline.ZERO_WAIT:
            arrival = None
        system = SystemSpec(discipline, service, arrival)
    changes = {"system": system}
    for flag, field in (("seed", "seed"), ("peaks", "n_peaks"), ("nu_hat", "nu_hat"),
                        ("replications", "replications"), ("bound_samples", "bound_samples")):
        value = getattr(args, flag)
        if value is not None:
            changes[field] = value
    return dataclasses.replace(scenario, **changes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        table = run(scenario, workers=max(1, args.workers))
        if args.out_csv:
            table.write_csv(args.out_csv)
        else:
            sys.stdout.write(table.to_csv())
        if args.out_svg:
            plot(table, args.out_svg)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"aoiviol: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
