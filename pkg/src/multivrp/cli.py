"""
The `multivrp` command line: generate, validate, rollout, bench, convert
and oracle.

Exit codes are 0 on success, 1 when a command fails and 2 on usage errors.
"""
import argparse
import json
import logging
import os
import sys
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from multivrp.default_fixtures import generate_toy
from multivrp.env import batch_rollout
from multivrp.manifests import (
    ingest_instances,
    load_observation_config,
    read_instance,
    write_instance,
    write_instance_set,
)
from multivrp.models import (
    SPLIT_SEED_OFFSETS,
    BenchmarkFormat,
    EnvConfig,
    EpisodeStats,
    GenerationSpec,
    InstanceData,
    InstanceSet,
    ProblemType,
    RewardMode,
    RolloutSummary,
    SelectorKind,
    Split,
)
from multivrp.oracle import brute_force_optimum
from multivrp.parse import parse_benchmark
from multivrp.policies import (
    POLICIES,
    aggregate_stats,
    dump_results,
    find_reference,
    gap,
    load_reference_scores,
    read_results,
    write_results,
)
from multivrp.validation import DecodeError, MultiVRPError, validate_instance

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "MULTIVRP_DATA_DIR"
DEFAULT_DATA_DIR = "data"

EXIT_OK = 0
EXIT_FAILURE = 1


def data_dir() -> str:
    """The default data directory, overridable through the environment."""
    return os.environ.get(DATA_DIR_ENV, DEFAULT_DATA_DIR)


def _seed_range(value: str) -> Tuple[int, int]:
    try:
        start, stop = (int(part) for part in value.split(":"))
    except ValueError as error:
        raise argparse.ArgumentTypeError(
            f"expected START:STOP, got '{value}'."
        ) from error
    if stop <= start:
        raise argparse.ArgumentTypeError(f"empty seed range '{value}'.")
    return start, stop


def cmd_generate(args: argparse.Namespace) -> int:
    """Generate an instance set with its manifest."""
    overrides = {
        field: getattr(args, field)
        for field in ("num_agents", "capacity", "horizon")
        if getattr(args, field) is not None
    }
    spec = GenerationSpec.default(args.problem, args.num_services)
    if overrides:
        spec = GenerationSpec(**{**spec.dict(), **overrides})
    split = Split(args.split)
    if args.seed_range:
        start, stop = args.seed_range
        offset = SPLIT_SEED_OFFSETS[split]
        instance_set = InstanceSet(
            split=split, seeds=list(range(offset + start, offset + stop)), spec=spec
        )
    else:
        instance_set = InstanceSet.for_split(split, spec, args.count)
    out_dir = args.out or os.path.join(
        data_dir(), f"{spec.problem.value.lower()}_{spec.num_services}", split.value
    )
    file_names = write_instance_set(instance_set, out_dir)
    print(f"Wrote {len(file_names)} instances and a manifest to {out_dir}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    """Validate one instance file and print its report."""
    try:
        instance = read_instance(args.in_file)
    except DecodeError as error:
        print(f"{args.in_file}: {error}")
        return EXIT_FAILURE
    report = validate_instance(instance)
    if report.ok:
        print(f"{args.in_file}: ok")
        return EXIT_OK
    print(f"{args.in_file}: {len(report.violations)} violation(s)")
    for violation in report.violations:
        print(f"  {violation.code} [{violation.index}] {violation.message}")
    return EXIT_FAILURE


def _rollout_instances(args: argparse.Namespace) -> List[InstanceData]:
    if args.toy:
        return [generate_toy(ProblemType(args.toy))]
    return ingest_instances(args.instances or data_dir())


def cmd_rollout(args: argparse.Namespace) -> int:
    """Roll a policy out over a batch and print one record per line."""
    instances = _rollout_instances(args)
    if not instances:
        print("No instances found.")
        return EXIT_FAILURE
    config = EnvConfig(
        selector=args.selector,
        reward_mode=args.reward,
        observations=load_observation_config(args.observations)
        if args.observations
        else None,
        allow_mixed_sizes=args.allow_mixed_sizes,
    )
    seeds = None if args.seed is None else [args.seed + index for index in range(len(instances))]
    results = batch_rollout(instances, args.policy, config, seeds, jobs=args.jobs)
    episodes = [result for result in results if isinstance(result, EpisodeStats)]
    records: List = list(results)
    if episodes:
        records.append(aggregate_stats(episodes, args.policy, config.selector))
    print(dump_results(records), end="")
    if args.out:
        write_results(args.out, records)
        logger.info("Wrote %d records to %s.", len(records), args.out)
    return EXIT_FAILURE if len(episodes) < len(results) else EXIT_OK


def _summaries(records: Sequence) -> List[RolloutSummary]:
    """Summary records, or summaries of the episodes grouped by problem and size."""
    summaries = [record for record in records if isinstance(record, RolloutSummary)]
    if summaries:
        return summaries
    groups: Dict[Tuple[ProblemType, int], List[EpisodeStats]] = defaultdict(list)
    for record in records:
        if isinstance(record, EpisodeStats):
            groups[(record.problem, record.num_services)].append(record)
    return [aggregate_stats(groups[key]) for key in sorted(groups)]


def cmd_bench(args: argparse.Namespace) -> int:
    """Print the gap of every summary to its reference score."""
    records = read_results(args.results)
    references = load_reference_scores(args.ref)
    summaries = _summaries(records)
    if not summaries:
        print(f"No episodes in {args.results}.")
        return EXIT_FAILURE
    print(f"{'problem':<9} {'size':>5} {'selector':<14} {'av. obj':>10} {'ref':>10} {'gap %':>7}")
    for summary in summaries:
        reference = None
        if summary.problem is not None and summary.num_services is not None:
            reference = find_reference(references, summary.problem, summary.num_services)
        ref_text, gap_text = "n/a", "n/a"
        if reference is not None:
            ref_text = f"{reference.score:.3f}"
            gap_text = f"{gap(summary.av_obj, reference.score):.1f}"
        print(
            f"{summary.problem.value if summary.problem else 'mixed':<9} "
            f"{summary.num_services if summary.num_services is not None else '-':>5} "
            f"{summary.selector.value if summary.selector else '-':<14} "
            f"{summary.av_obj:>10.3f} {ref_text:>10} {gap_text:>7}"
        )
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    """Convert a benchmark file into an instance document."""
    with open(args.in_file, "rb") as benchmark_file:
        instance = parse_benchmark(
            args.format,
            benchmark_file.read(),
            name=args.name,
            problem=args.problem,
        )
    write_instance(args.out, instance)
    print(f"Wrote '{instance.name}' ({instance.num_services} services) to {args.out}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    """Print the exhaustive-search optimum of a tiny instance."""
    instance = read_instance(args.in_file)
    result = brute_force_optimum(
        instance, EnvConfig(selector=args.selector), max_depth=args.max_depth
    )
    print(json.dumps(json.loads(result.json()), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of every subcommand."""
    parser = argparse.ArgumentParser(
        prog="multivrp", description="Multi-agent routing environments with time windows."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug output.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    problems = [problem.value for problem in ProblemType]
    selectors = [selector.value for selector in SelectorKind]

    generate = subparsers.add_parser("generate", help="Generate an instance set.")
    generate.add_argument("--problem", choices=problems, required=True)
    generate.add_argument("--num-services", type=int, default=50)
    generate.add_argument("--num-agents", type=int, default=None)
    generate.add_argument("--capacity", type=float, default=None)
    generate.add_argument("--horizon", type=float, default=None)
    generate.add_argument(
        "--split", choices=[split.value for split in Split], default=Split.VALIDATION.value
    )
    seeds = generate.add_mutually_exclusive_group()
    seeds.add_argument("--count", type=int, default=10)
    seeds.add_argument(
        "--seed-range",
        type=_seed_range,
        default=None,
        help="START:STOP seeds, relative to the split's seed range.",
    )
    generate.add_argument("--out", default=None, help="Output directory.")
    generate.set_defaults(handler=cmd_generate)

    validate = subparsers.add_parser("validate", help="Validate an instance file.")
    validate.add_argument("--in", dest="in_file", required=True)
    validate.set_defaults(handler=cmd_validate)

    rollout = subparsers.add_parser("rollout", help="Roll a policy out over instances.")
    source = rollout.add_mutually_exclusive_group()
    source.add_argument("--instances", default=None, help="Instance file or directory.")
    source.add_argument("--toy", choices=problems, default=None)
    rollout.add_argument("--policy", choices=sorted(POLICIES), default="greedy_nearest")
    rollout.add_argument("--selector", choices=selectors, default=SelectorKind.ROUND_ROBIN.value)
    rollout.add_argument(
        "--reward", choices=[mode.value for mode in RewardMode], default=RewardMode.DENSE.value
    )
    rollout.add_argument("--observations", default=None, help="Observation config file.")
    rollout.add_argument("--seed", type=int, default=None)
    rollout.add_argument("--allow-mixed-sizes", action="store_true")
    rollout.add_argument("--jobs", type=int, default=1)
    rollout.add_argument("--out", default=None, help="Results file (JSON lines).")
    rollout.set_defaults(handler=cmd_rollout)

    bench = subparsers.add_parser("bench", help="Compare results to reference scores.")
    bench.add_argument("--results", required=True)
    bench.add_argument("--ref", default=None, help="Reference scores file.")
    bench.set_defaults(handler=cmd_bench)

    convert = subparsers.add_parser("convert", help="Convert a benchmark file.")
    convert.add_argument(
        "--format", choices=[fmt.value for fmt in BenchmarkFormat], required=True
    )
    convert.add_argument("--in", dest="in_file", required=True)
    convert.add_argument("--out", required=True)
    convert.add_argument("--name", default=None)
    convert.add_argument(
        "--problem", choices=problems, default=None, help="Variant read from a Solomon file."
    )
    convert.set_defaults(handler=cmd_convert)

    oracle = subparsers.add_parser("oracle", help="Solve a tiny instance exhaustively.")
    oracle.add_argument("--in", dest="in_file", required=True)
    oracle.add_argument(
        "--selector",
        choices=[SelectorKind.ROUND_ROBIN.value, SelectorKind.SMALLEST_TIME.value],
        default=SelectorKind.ROUND_ROBIN.value,
    )
    oracle.add_argument("--max-depth", type=int, default=None)
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run a subcommand and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except MultiVRPError as error:
        print(error, file=sys.stderr)
        return EXIT_FAILURE
    except ValidationError as error:
        print(error, file=sys.stderr)
        return EXIT_FAILURE
    except OSError as error:
        print(f"{error.filename}: {error.strerror}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
