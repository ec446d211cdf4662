# commands package
# Each module registers one subcommand through setup(cli)

import argparse
import os
from dataclasses import fields
from typing import Optional

from config import DEFAULT_CONFIG, Config, PipelineConfig, to_key
from utils.errors import ConfigError


class UsageError(Exception):
    """Flag combination rejected before any file is touched."""


def add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    """Expose every pipeline setting as --<key>; unset flags leave the config file value alone."""
    group = parser.add_argument_group("pipeline settings (override --config)")
    for f in fields(PipelineConfig):
        key = to_key(f.name)
        default = DEFAULT_CONFIG[key]
        if isinstance(default, bool):
            group.add_argument(f"--{key}", dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        else:
            kind = int if default is None else type(default)
            group.add_argument(f"--{key}", dest=f.name, type=kind, default=None, metavar=key.upper().replace("-", "_"))


def pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Resolve the pipeline settings for a command.

    Flags are validated against the defaults first so bad values fail before
    the config file is read; file values are then overridden by the flags.
    """
    overrides = {f.name: getattr(args, f.name, None) for f in fields(PipelineConfig)}
    if getattr(args, "seed", None) is not None and overrides.get("cluster_seed") is None:
        overrides["cluster_seed"] = args.seed
    try:
        PipelineConfig().with_overrides(**overrides)
    except ConfigError as e:
        raise UsageError(e.message) from e
    return Config(args.config).pipeline().with_overrides(**overrides)


def resolve_jobs(args: argparse.Namespace) -> Optional[int]:
    if args.jobs is not None:
        if args.jobs < 1:
            raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
        return args.jobs
    env = os.getenv("INPAINT_FORENSICS_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"INPAINT_FORENSICS_JOBS must be an integer, got {env!r}")
    return None
