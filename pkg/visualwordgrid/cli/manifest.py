"""Run manifests written next to every command output."""

from __future__ import annotations

import datetime
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from .. import __version__
from ..exceptions import IoFailureError

RUN_MANIFEST_NAME = "run.json"


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    seed: Optional[int] = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    started_at: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    wall_clock_seconds: float = 0.0
    _clock: float = field(default_factory=time.perf_counter, repr=False)

    def to_json(self) -> dict[str, Any]:
        payload = asdict(self)
        payload.pop("_clock")
        return payload

    def finish(self, target: Path) -> Path:
        """Stamp the elapsed time and write the manifest for ``target``.

        Directories get ``run.json`` inside; files get ``<name>.run.json`` beside them.
        """

        self.wall_clock_seconds = round(time.perf_counter() - self._clock, 3)
        target = Path(target)
        path = target / RUN_MANIFEST_NAME if target.is_dir() else target.with_name(f"{target.name}.run.json")
        try:
            path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        except OSError as exc:
            raise IoFailureError(f"Unable to write run manifest {path}: {exc}") from exc
        return path
