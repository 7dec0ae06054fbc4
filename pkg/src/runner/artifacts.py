"""Run directories: JSON and CSV artifacts, the manifest and the aggregate report."""
import csv
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from src import __version__
from src.config import CSV_FLOAT_FORMAT
from src.errors import MissingArtifactsError
from src.grid.export import write_table
from src.log import get_logger
from src.models.reports import RunManifest, Verdict

logger = get_logger(__name__)

MANIFEST = "manifest.json"
REPORT = "report.json"
# Files cmd_report aggregates
REPORT_INPUTS = (MANIFEST, "verify.json", "decay.json")
RECORD_COLUMNS = ["check", "t", "lhs", "rhs", "constant", "verdict"]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def file_digest(path: Path) -> str:
    """SHA256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT % value
    return str(value)


class RunArtifacts:
    """One run directory and the files emitted into it.

    Every write goes through this class so the manifest can list each
    file with its checksum. JSON is written with sorted keys and a
    trailing newline, which makes identical inputs byte-identical.
    """

    def __init__(self, directory: Path):
        """Initialize the run directory (created on first write).

        Args:
            directory: Run directory
        """
        self.directory = Path(directory)
        self.written: List[str] = []

    def path(self, name: str) -> Path:
        return self.directory / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def register(self, path: Path) -> Path:
        """Record a file written into the run directory."""
        name = path.relative_to(self.directory).as_posix()
        if name not in self.written:
            self.written.append(name)
        logger.debug("wrote %s", path)
        return path

    def write_json(self, name: str, data: Any) -> Path:
        """Write data as indented JSON with sorted keys."""
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return self.register(path)

    def read_json(self, name: str) -> Any:
        with open(self.path(name), "r") as f:
            return json.load(f)

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
        """Write a numeric table (17 significant digits)."""
        return self.register(write_table(self.path(name), columns, rows))

    def write_rows(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write a mixed text/number table; None becomes an empty cell."""
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        return self.register(path)

    def load_manifest(self) -> Optional[RunManifest]:
        if not self.exists(MANIFEST):
            return None
        return RunManifest.from_dict(self.read_json(MANIFEST))

    def update_manifest(self, config_hash: Optional[str] = None) -> RunManifest:
        """Rewrite the manifest with checksums of every file in the run.

        Files listed by an earlier command are kept while they still
        exist; their checksums are recomputed.

        Args:
            config_hash: Hash of the config the command ran with; None
                keeps the recorded one

        Returns:
            The written manifest
        """
        previous = self.load_manifest()
        now = _now()
        if previous is not None and config_hash and previous.config_hash != config_hash:
            logger.warning("run directory %s was produced by a different config", self.directory)
        names = set(self.written)
        if previous is not None:
            names |= {n for n in previous.artifacts if self.exists(n)}
        names.discard(MANIFEST)
        manifest = RunManifest(
            config_hash=config_hash or (previous.config_hash if previous else ""),
            tool_version=__version__,
            started_at=previous.started_at if previous else now,
            updated_at=now,
            artifacts={name: file_digest(self.path(name)) for name in sorted(names)},
        )
        path = self.path(MANIFEST)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
        return manifest

    def missing(self, names: Sequence[str] = REPORT_INPUTS) -> List[str]:
        return [name for name in names if not self.exists(name)]

    def aggregate(self) -> Dict[str, Any]:
        """Collect verify.json, decay.json and solve.json into one report.

        The result carries no timestamps, so re-running it on the same
        inputs produces the same bytes.

        Raises:
            MissingArtifactsError: verify.json, decay.json or the manifest
                is absent
        """
        missing = self.missing()
        if missing:
            raise MissingArtifactsError(str(self.directory), missing)

        manifest = self.load_manifest()
        verify = self.read_json("verify.json")
        decay = self.read_json("decay.json")
        checks = [summary_row(r) for r in verify.get("records", [])]
        checks += [summary_row(r) for r in decay.get("records", [])]
        counts = {v.value: 0 for v in Verdict}
        for row in checks:
            counts[row["verdict"]] += 1

        report = {
            "config_hash": manifest.config_hash,
            "family": verify.get("family", {}).get("name"),
            "checks": checks,
            "counts": counts,
            "decay": {
                key: decay["report"][key]
                for key in ("p", "fitted_exponent", "theoretical_exponent", "max_prefactor",
                            "bounded", "vanishing", "decays", "spans_decade")
            },
            "norms": [
                {"p": n["p"], "q": n["q"], "value": n["value"]} for n in decay.get("norms", [])
            ],
            "trends": [
                {"q": tr["q"], "diverging": tr["diverging"]} for tr in decay.get("trends", [])
            ],
            "verdict": Verdict.FAIL.value if counts[Verdict.FAIL.value] else Verdict.PASS.value,
        }
        if self.exists("solve.json"):
            solve = self.read_json("solve.json")
            report["solve"] = {
                key: solve.get(key)
                for key in ("oracle_error", "residual_max", "iterations", "method", "converged")
            }
        return report

    def write_report(self) -> Dict[str, Any]:
        """Aggregate, write report.json and refresh the manifest."""
        report = self.aggregate()
        self.write_json(REPORT, report)
        self.update_manifest()
        return report


def summary_row(record: Dict[str, Any]) -> Dict[str, Any]:
    """Compact report row from a record dictionary."""
    inputs = record.get("inputs", {})
    return {
        "check": record["check"],
        "t": inputs.get("t"),
        "lhs": record.get("lhs"),
        "rhs": record.get("rhs"),
        "constant": record.get("constant"),
        "verdict": record["verdict"],
    }
