"""
Artifact store: every CSV/JSON written by the toolkit goes through here, and
each file gets a sibling `<name>.manifest.json` recording the full config and
master seed that produced it. Per-run record files live under `runs/<tag>/`
and are merged single-threaded once every run is done.
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from utils.seeding import RNG_ALGORITHM

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"
SEED_DERIVATION = "splitmix64(master) + (index + 1) * 0x9E3779B97F4A7C15, splitmix64 finalizer"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


class ArtifactStore:
    """Writes artifacts under one output directory, manifests alongside."""

    def __init__(self, output_dir: Union[str, Path], config: Optional[dict] = None, master_seed: Optional[int] = None):
        self.output_dir = Path(output_dir)
        self.config = dict(config or {})
        self.master_seed = master_seed
        self.warnings: list = []
        self.written: list = []
        self._ensure_output_dir(self.output_dir)

    def _ensure_output_dir(self, path: Path) -> None:
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error("❌ cannot create output directory %s: %s", path, e)
            raise

    def warn(self, message: str) -> None:
        """Record a warning in every manifest written from now on."""
        logger.warning("⚠️ %s", message)
        if message not in self.warnings:
            self.warnings.append(message)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def manifest(self, extra: Optional[dict] = None) -> dict:
        out = {
            "config": self.config,
            "master_seed": self.master_seed,
            "rng": RNG_ALGORITHM,
            "seed_derivation": SEED_DERIVATION,
            "warnings": list(self.warnings),
        }
        if extra:
            out.update(extra)
        return out

    def _write_manifest(self, target: Path, extra: Optional[dict]) -> None:
        payload = self.manifest(extra)
        payload["file"] = target.name
        target.with_name(target.name + MANIFEST_SUFFIX).write_text(dumps(payload), encoding="utf-8")

    # ── writers ────────────────────────────────────────────────────────
    def write_csv(self, name: str, frame: pd.DataFrame, extra: Optional[dict] = None) -> Path:
        target = self.path(name)
        self._ensure_output_dir(target.parent)
        frame.to_csv(target, index=False, lineterminator="\n")
        self._write_manifest(target, extra)
        self.written.append(str(target))
        logger.info("✅ wrote %s (%d rows)", target, len(frame))
        return target

    def write_json(self, name: str, payload, extra: Optional[dict] = None) -> Path:
        target = self.path(name)
        self._ensure_output_dir(target.parent)
        target.write_text(dumps(payload), encoding="utf-8")
        self._write_manifest(target, extra)
        self.written.append(str(target))
        logger.info("✅ wrote %s", target)
        return target

    # ── per-run records ────────────────────────────────────────────────
    def run_record(self, tag: str, run: int, kind: str) -> Path:
        return self.path(f"runs/{tag}/{kind}-run{run:03d}.csv")

    def save_run(self, tag: str, run: int, frames: dict, run_config: dict) -> None:
        """Write one run's record files with a manifest pinning its config."""
        for kind, frame in frames.items():
            self.write_csv(str(self.run_record(tag, run, kind).relative_to(self.output_dir)), frame, {"run": run_config})

    def load_run(self, tag: str, run: int, kinds: tuple, run_config: dict) -> Optional[dict]:
        """Reuse a finished run when every record exists and its manifest matches."""
        frames = {}
        expected = _jsonable(run_config)
        for kind in kinds:
            target = self.run_record(tag, run, kind)
            manifest = target.with_name(target.name + MANIFEST_SUFFIX)
            if not target.exists() or not manifest.exists():
                return None
            try:
                recorded = json.loads(manifest.read_text(encoding="utf-8")).get("run")
            except json.JSONDecodeError:
                return None
            if recorded != expected:
                logger.info("run %d of %s has a different config; recomputing", run, tag)
                return None
            frames[kind] = pd.read_csv(target)
        logger.info("♻️ reusing run %d of %s", run, tag)
        return frames

    @staticmethod
    def merge_runs(frames: list) -> pd.DataFrame:
        """Concatenate per-run frames in run order, tagging each row with its run."""
        if not frames:
            return pd.DataFrame()
        tagged = [f.assign(run=i)[["run", *f.columns]] for i, f in enumerate(frames)]
        return pd.concat(tagged, ignore_index=True)
