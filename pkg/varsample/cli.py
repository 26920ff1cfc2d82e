#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Command-line pipeline: sample -> persist -> infer, plus subsample and verify

Exit codes: 0 ok, 3 bad input, 4 solver failure, 5 interrupted (checkpoint
written), 6 simplex cap exceeded, 7 verification failed.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
import pydantic
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from varsample import __version__
from varsample.exceptions import (ConfigError, InputError, SamplerAborted, SimplexCapExceeded, SolverException,
                                  VarsampleException)
from varsample.model import PipelineConfig, PersistenceConfig
from varsample.parser import load_example, parse_file
from varsample.polysys import PolynomialSystem
from varsample.sampler import read_sample_csv, resume, sample, subsample, verify_sample, write_sample_csv
from varsample.tda import (compute_persistence, emit_diagram, infer_betti, read_diagram_csv, rips_filtration,
                           inference_corner)
from varsample.utils.common import parse_float_list, print_json, to_json
from varsample.utils.config import PipelineConfigManager

logger = logging.getLogger(__name__)

CONTEXT_SETTINGS = dict(help_option_names=['-h', '--help'])

EXIT_INPUT = 3
EXIT_SOLVER = 4
EXIT_INTERRUPTED = 5
EXIT_SIMPLEX_CAP = 6
EXIT_VERIFY = 7


def enable_logger_to_console(level):
    _logger = logging.getLogger("varsample")
    _logger.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in _logger.handlers):
        _logger.addHandler(RichHandler(enable_link_path=False))


def handle_errors(func):
    """Turn package exceptions into the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SimplexCapExceeded as e:
            logger.error(str(e))
            sys.exit(EXIT_SIMPLEX_CAP)
        except SamplerAborted as e:
            logger.error(f"{e}; resume with --resume {e.checkpoint}")
            interrupted = isinstance(e.__cause__, KeyboardInterrupt)
            sys.exit(EXIT_INTERRUPTED if interrupted else EXIT_SOLVER)
        except SolverException as e:
            logger.error(f"solver failure: {e}")
            sys.exit(EXIT_SOLVER)
        except pydantic.ValidationError as e:
            logger.error(f"invalid configuration: {e}")
            sys.exit(EXIT_INPUT)
        except (InputError, FileNotFoundError) as e:
            logger.error(str(e))
            sys.exit(EXIT_INPUT)
        except VarsampleException as e:
            logger.error(str(e))
            sys.exit(EXIT_INPUT)

    return wrapper


def load_system(system: Optional[str], example: Optional[str]) -> PolynomialSystem:
    if example:
        return load_example(example)
    if not system:
        raise ConfigError("one of --system or --example is required")
    return parse_file(system)


def _box(value: Optional[str]):
    return parse_float_list(value) if value else None


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option("--verbose", "-v", is_flag=True, default=False, help="verbose mode")
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None,
              help="key = value config file (default: ./varsample.conf if present)")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config_file: Optional[str]):
    if verbose:
        enable_logger_to_console(level=logging.DEBUG)
        logger.debug("Verbose mode enabled")
    else:
        enable_logger_to_console(level=logging.INFO)
    try:
        manager = PipelineConfigManager(config_file)
    except ConfigError as e:
        logger.error(str(e))
        sys.exit(EXIT_INPUT)
    ctx.default_map = manager.default_map()
    ctx.obj = manager


@cli.command('version')
def print_version():
    """ Print version """
    print(__version__)


@cli.command("sample", help="sample a real variety inside a box")
@click.option("--system", type=click.Path(dir_okay=False), help="system file")
@click.option("--example", help="bundled system name, e.g. circle, torus")
@click.option("--box", help="lo1,hi1,lo2,hi2,... (a single lo,hi applies to every variable)")
@click.option("--epsilon", type=float, help="density epsilon")
@click.option("--delta", type=float, default=0.0, show_default=True, help="accuracy delta")
@click.option("--dynamic-split", is_flag=True, default=False, help="split boxes along covered regions")
@click.option("--dynamic-sample", type=float, default=None, help="refuse points closer than RHO to the sample")
@click.option("--priority-search", is_flag=True, default=False, help="largest boxes first within a level")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--backend", default="internal", show_default=True, help="internal, or an external solver executable")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True, help="output directory")
@click.option("--resume", "resume_from", type=click.Path(dir_okay=False), default=None, help="checkpoint to resume")
@click.option("--tracking-tol", type=float, default=None, help="Newton tolerance along paths (default 1e-8)")
@click.option("--endpoint-tol", type=float, default=None, help="residual required at t=0 (default 1e-11)")
@click.option("--min-step", type=float, default=None, help="step size below which a path is singular (default 1e-14)")
@click.option("--max-step", type=float, default=None, help="largest step in t (default 0.1)")
@click.option("--max-newton", type=int, default=None, help="Newton iterations per correction (default 3)")
@click.option("--divergence-bound", type=float, default=None, help="norm at which a path diverges (default 1e8)")
@click.option("--endgame-start", type=float, default=None, help="t below which conditioning is watched (default 0.1)")
@handle_errors
def sample_cmd(system, example, box, epsilon, delta, dynamic_split, dynamic_sample, priority_search, seed, workers,
               backend, out, resume_from, **tracker):
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if resume_from:
        cloud = resume(resume_from)
    else:
        cfg = PipelineConfig(system=system, example=example, box=_box(box), epsilon=epsilon, delta=delta,
                             dynamic_split=dynamic_split, dynamic_sample=dynamic_sample,
                             priority_search=priority_search, seed=seed, workers=workers, backend=backend, out=out,
                             **tracker)
        if cfg.epsilon is None:
            raise ConfigError("--epsilon is required")
        sys_ = load_system(cfg.system, cfg.example)
        try:
            sampler_cfg = cfg.sampler_config(sys_.num_vars, checkpoint_path=str(out_dir / "checkpoint.json"))
        except ValueError as e:
            raise ConfigError(str(e))
        cloud = sample(sys_, sampler_cfg, backend=cfg.backend)
    path = write_sample_csv(cloud, out_dir / "sample.csv")
    (out_dir / "certificate.json").write_text(to_json(cloud.certificate), encoding="utf-8")
    if not cloud.points:
        logger.info("V_R empty: no real point of the variety in the region")
    logger.info(f"wrote {len(cloud)} points to {path}, certificate {cloud.certificate.describe()}")


@cli.command(help="Vietoris-Rips persistence of a sample")
@click.argument("sample_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--tmax", type=float, default=None, help="filtration threshold (default 4*epsilon + 2*delta)")
@click.option("--pmax", type=int, default=1, show_default=True, help="highest homology dimension")
@click.option("--simplex-cap", type=int, default=None, help="refuse complexes larger than this")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@handle_errors
def persist(sample_csv, tmax, pmax, simplex_cap, out):
    cloud = read_sample_csv(sample_csv)
    cert = cloud.certificate
    if tmax is None:
        tmax = inference_corner(max(cloud.num_vars, 1), cert.epsilon, cert.delta).b
    options = dict(t_max=tmax, p_max=pmax)
    if simplex_cap is not None:
        options["simplex_cap"] = simplex_cap
    pcfg = PersistenceConfig(**options)
    fc = rips_filtration(cloud.array, pcfg.t_max, pcfg.p_max, pcfg.simplex_cap)
    diag = compute_persistence(fc, clearing=pcfg.clearing)
    diag.ambient_dim = cloud.num_vars
    diag.epsilon = cert.epsilon
    diag.delta = cert.delta
    diag.seed = cloud.seed
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = emit_diagram(diag, None, "csv", out_dir / "diagram.csv")
    logger.info(f"{len(fc)} simplices, {len(diag)} intervals ({diag.zero_length} zero-length dropped) -> {path}")


@cli.command(help="Betti-number lower bounds from a diagram")
@click.argument("diagram_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "ambient_dim", type=int, default=None, help="ambient dimension (default from the diagram)")
@click.option("--epsilon", type=float, default=None, help="default from the diagram")
@click.option("--delta", type=float, default=None, help="default from the diagram")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@handle_errors
def infer(diagram_csv, ambient_dim, epsilon, delta, out):
    diag = read_diagram_csv(diagram_csv)
    ambient_dim = ambient_dim if ambient_dim is not None else diag.ambient_dim
    epsilon = epsilon if epsilon is not None else diag.epsilon
    delta = delta if delta is not None else (diag.delta or 0.0)
    if ambient_dim is None or epsilon is None:
        raise ConfigError("--n and --epsilon are required when the diagram does not record them")
    verdict = infer_betti(diag, int(ambient_dim), float(epsilon), float(delta))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "verdict.json").write_text(to_json(verdict), encoding="utf-8")
    emit_diagram(diag, verdict, "svg", out_dir / "diagram.svg")

    a, b = verdict.corner
    table = Table(title=f"corner ({a:.6g}, {b:.6g})")
    table.add_column("dimension")
    table.add_column("Betti lower bound")
    for dim, count in sorted(verdict.counts.items()):
        table.add_row(str(dim), str(count))
    console = Console()
    console.print(table)
    console.print(f"[bold]{verdict.assumption}[/bold]")
    for message in verdict.warnings:
        console.print(f"[yellow]warning:[/yellow] {message}")
    print_json(verdict)


@cli.command("subsample", help="greedy thinning of a sample")
@click.argument("sample_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--radius", type=float, required=True, help="drop points within this distance of a kept point")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@handle_errors
def subsample_cmd(sample_csv, radius, seed, out):
    cloud = read_sample_csv(sample_csv)
    thinned = subsample(cloud, radius, seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = write_sample_csv(thinned, out_dir / "subsample.csv")
    logger.info(f"{len(cloud)} -> {len(thinned)} points, certificate {thinned.certificate.describe()} -> {path}")


@cli.command(help="check a sample against a dense reference cloud")
@click.argument("sample_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--system", type=click.Path(dir_okay=False), help="system file")
@click.option("--example", help="bundled system name")
@click.option("--oracle", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV of reference points on the variety inside the region")
@handle_errors
def verify(sample_csv, system, example, oracle):
    cloud = read_sample_csv(sample_csv)
    sys_ = load_system(system, example)
    reference = np.loadtxt(oracle, delimiter=",", comments="#", ndmin=2)
    report = verify_sample(cloud, sys_, reference)
    print_json(report)
    if not report.passed:
        logger.error(f"verification failed: {report.reason}")
        sys.exit(EXIT_VERIFY)


def main():
    cli()


if __name__ == "__main__":
    main()
