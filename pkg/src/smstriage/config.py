"""Service configuration: JSON config file with environment overrides.

Environment variables win over the file; both win over defaults.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError

ENV_PREFIX = "SMSTRIAGE_"


@dataclass
class ServiceConfig:
    data_dir: str = "./smstriage-data"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8470
    default_char_limit: int = 140
    mode: str = "live"  # live (threaded pipeline) | sync (deterministic, inline)
    seed: int | None = None  # None -> OS entropy
    lease_seconds: float = 120.0
    selection: str = "uncertainty"  # task selection policy; 'random' for baselines
    max_inflight: int = 128  # ingest admission window (live mode); bounds
    # queue wait and with it ingest-to-classified latency under burst load
    batch_size: int = 64  # classification micro-batch (live mode)
    fsync: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("live", "sync"):
            raise ValidationError("mode must be 'live' or 'sync'")
        if self.default_char_limit < 1:
            raise ValidationError("default charLimit must be >= 1")


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Build a config from an optional JSON file plus environment."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        values.update(json.loads(Path(path).read_text(encoding="utf-8")))

    listen = env.get(ENV_PREFIX + "LISTEN")
    if listen:
        host, _, port = listen.rpartition(":")
        values["listen_host"] = host or values.get("listen_host", "127.0.0.1")
        values["listen_port"] = int(port)
    if env.get(ENV_PREFIX + "DATA_DIR"):
        values["data_dir"] = env[ENV_PREFIX + "DATA_DIR"]
    if env.get(ENV_PREFIX + "DEFAULT_CHAR_LIMIT"):
        values["default_char_limit"] = int(env[ENV_PREFIX + "DEFAULT_CHAR_LIMIT"])

    known = {k: v for k, v in values.items() if k in ServiceConfig.__dataclass_fields__}
    unknown = {k: v for k, v in values.items() if k not in known}
    config = ServiceConfig(**known)
    config.extra = unknown
    return config
