"""mmWave V2V highway simulator.

Configs are plain dicts with the same sections as the JSON config files.
Angles are in degrees.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    RunError,
    alignment_delay,
    antenna_gain,
    channel_gain_db,
    deferred_acceptance,
    link_rate,
)

__all__ = [
    "ConfigError",
    "RunError",
    "alignment_delay",
    "antenna_gain",
    "channel_gain_db",
    "cli",
    "default_config",
    "deferred_acceptance",
    "link_rate",
    "run",
    "validate",
]


def default_config():
    return json.loads(_core.default_config())


def run(config=None, out_dir=None):
    """Run one simulation. `config` may be partial; missing keys keep defaults.
    Returns the summary as a dict and writes the report files when out_dir is given."""
    text = json.dumps(config or {})
    return json.loads(_core.run(text, str(out_dir) if out_dir else ""))


def validate(config=None):
    return [
        {"name": n, "ok": ok, "detail": d}
        for n, ok, d in _core.validate(json.dumps(config or {}))
    ]


def cli(args):
    return _core.cli([str(a) for a in args])
