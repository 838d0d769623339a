"""Command-line entry point: ``cutselect <command> ...``."""

from __future__ import annotations

import csv
import io
import logging
import math
import sys
from pathlib import Path

import click

from .bench.harness import (PRESETS, list_instances, parse_seeds, resolve_config, run_bench,
                            screen_instances, stats_to_record)
from .bench.metrics import (compare_runs, emit_histogram, histogram_csv, is_affected, pair_up,
                            relative_improvements, wilcoxon_signed_rank)
from .bench.records import records_from_csv, records_to_csv, split_by_config
from .bench.tune import DEFAULT_SPACE, random_search_tune
from .cutsel import dump_config
from .engine import branch_and_bound
from .model import (compute_features, read_features_csv, select_diverse_subset,
                    write_features_csv)
from .mps import read_mps


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose: bool) -> None:
    """Branch-and-cut MILP solver with configurable cut selection."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config", default="default",
              help=f"Config file or preset ({', '.join(PRESETS)}).")
@click.option("--seed", default=1, show_default=True)
@click.option("--time-limit", default=math.inf, type=float)
@click.option("--node-limit", default=None, type=int)
@click.option("--timing", type=click.Choice(["work", "wall"]), default="wall",
              show_default=True, help="'work' reports simplex iterations in the time column.")
def solve(instance, config, seed, time_limit, node_limit, timing):
    """Solve one MPS instance and print its result row."""
    cid, cfg = resolve_config(config)
    inst = read_mps(instance)
    stats = branch_and_bound(inst, cfg, time_limit=time_limit, node_limit=node_limit, seed=seed)
    rec = stats_to_record(Path(instance).stem, seed, cid, stats, timing)
    click.echo(records_to_csv([rec]), nl=False)


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--configs", default="default,unranked", show_default=True,
              help="Comma-separated presets or config files.")
@click.option("--seeds", default="1..5", show_default=True)
@click.option("--out", default=None, help="Output CSV (stdout if omitted).")
@click.option("--workers", default=1, show_default=True)
@click.option("--time-limit", default=math.inf, type=float)
@click.option("--node-limit", default=None, type=int)
@click.option("--timing", type=click.Choice(["work", "wall"]), default="work",
              show_default=True,
              help="'work' (simplex iterations) keeps the CSV reproducible byte for byte.")
def bench(directory, configs, seeds, out, workers, time_limit, node_limit, timing):
    """Solve every instance in DIRECTORY under each config and seed."""
    cfgs = [resolve_config(c.strip()) for c in configs.split(",") if c.strip()]
    records = run_bench(list_instances(directory), cfgs, parse_seeds(seeds), workers,
                        time_limit, node_limit, timing)
    _write(records_to_csv(records), out)


def _load_side(path: str, config_id: str | None):
    recs = records_from_csv(Path(path).read_text())
    groups = split_by_config(recs)
    if config_id is not None:
        if config_id not in groups:
            raise click.ClickException(f"{path} has no rows for config {config_id!r}")
        return groups[config_id]
    if len(groups) != 1:
        raise click.ClickException(f"{path} holds configs {sorted(groups)}; pick one with --config-a/--config-b")
    return recs


@cli.command()
@click.argument("a_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("b_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--config-a", default=None)
@click.option("--config-b", default=None)
@click.option("--time-shift", default=1.0, show_default=True)
@click.option("--node-shift", default=10.0, show_default=True)
@click.option("--affected-only", is_flag=True, help="Ratios over affected pairs only.")
@click.option("--pairs-out", default=None,
              help="Write per-pair relative time improvements to this CSV.")
def compare(a_csv, b_csv, config_a, config_b, time_shift, node_shift, affected_only,
            pairs_out):
    """Head-to-head metrics of run set A against run set B."""
    a = _load_side(a_csv, config_a)
    b = _load_side(b_csv, config_b)
    rep = compare_runs(a, b, time_shift, node_shift, affected_only)
    rows = rep.as_rows()
    solved = [(ra.time, rb.time) for ra, rb in pair_up(a, b)
              if ra.status == "Optimal" and rb.status == "Optimal"]
    w = wilcoxon_signed_rank(solved)
    rows += [("wilcoxon_p", repr(w.p_value)), ("wilcoxon_low_power", str(w.low_power))]
    click.echo(_csv(rows, ("metric", "value")), nl=False)
    if pairs_out:
        keys = [(ra.instance, ra.seed) for ra, rb in pair_up(a, b)
                if ra.status == "Optimal" and rb.status == "Optimal"
                and (not affected_only or is_affected(ra, rb))]
        vals = relative_improvements(a, b, affected_only=affected_only)
        Path(pairs_out).write_text(_csv(
            [(k[0], k[1], repr(v)) for k, v in zip(keys, vals)],
            ("instance", "seed", "relative_improvement")))


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--out", default=None)
def features(directory, out):
    """Feature vectors of every instance in DIRECTORY."""
    paths = list_instances(directory)
    feats = [compute_features(read_mps(p)) for p in paths]
    _write(write_features_csv([p.stem for p in paths], feats), out)


@cli.command()
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--k", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--restarts", default=0, show_default=True)
def pick(features_csv, k, seed, restarts):
    """Pick K maximally spread instances from a features CSV."""
    names, feats = read_features_csv(Path(features_csv).read_text())
    idx = select_diverse_subset(feats, k, seed=seed, restarts=restarts)
    click.echo(_csv([(i, names[i]) for i in idx], ("index", "instance")), nl=False)


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--passes", default=10, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--seeds", default="1", show_default=True, help="Solver seeds per evaluation.")
@click.option("--node-limit", default=None, type=int)
@click.option("--trace-out", default=None, help="Write the evaluation trace CSV here.")
@click.option("--best-out", default=None, help="Write the best config file here.")
def tune(directory, passes, seed, seeds, node_limit, trace_out, best_out):
    """Random search over selector parameters; prints the best config."""
    insts = [read_mps(p) for p in list_instances(directory)]
    best, trace = random_search_tune(DEFAULT_SPACE, insts, passes, seed, parse_seeds(seeds),
                                     node_limit=node_limit)
    if trace_out:
        keys = sorted(DEFAULT_SPACE)
        rows = [[i, repr(t.ratio)] + [_plain(getattr(t.config, k)) for k in keys]
                for i, t in enumerate(trace)]
        Path(trace_out).write_text(_csv(rows, ["sample", "ratio"] + keys))
    text = dump_config(best)
    if best_out:
        Path(best_out).write_text(text)
    click.echo(f"# best ratio {min(t.ratio for t in trace)!r}")
    click.echo(text, nl=False)


def _plain(v):
    return v.value if hasattr(v, "value") else repr(v) if isinstance(v, float) else v


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--bins", default=10, show_default=True)
@click.option("--column", default="relative_improvement", show_default=True)
def hist(csv_path, bins, column):
    """Equal-width histogram of one CSV column."""
    reader = csv.DictReader(io.StringIO(Path(csv_path).read_text()))
    if column not in (reader.fieldnames or ()):
        raise click.ClickException(f"column {column!r} not in {csv_path}")
    vals = [float(r[column]) for r in reader]
    click.echo(histogram_csv(emit_histogram(vals, bins)), nl=False)


@cli.command()
@click.argument("results_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-time", default=0.01, show_default=True)
@click.option("--max-time", default=60.0, show_default=True)
@click.option("--min-nodes", default=10, show_default=True)
@click.option("--max-nodes", default=100000, show_default=True)
def screen(results_csv, min_time, max_time, min_nodes, max_nodes):
    """Instances whose runs all fall inside the time and node windows.

    The time window applies to the CSV's time column as written: seconds for
    ``bench --timing wall``, simplex iterations for the default work timing.
    """
    recs = records_from_csv(Path(results_csv).read_text())
    keep = screen_instances(recs, min_time, max_time, min_nodes, max_nodes)
    click.echo(_csv([(k,) for k in keep], ("instance",)), nl=False)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("error: aborted", err=True)
        return 1
    except Exception as exc:  # noqa: BLE001 - one-line diagnostic for any failure
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
