import asyncio
import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from yarl import URL

from config import get_logger
from errors import RegistryValidationError, ServiceNotFoundError

logger = get_logger(__name__)


def now_ms() -> int:
    return int(time.time() * 1000)


def _is_absolute_url(value: str) -> bool:
    try:
        url = URL(value)
    except (TypeError, ValueError):
        return False
    return url.is_absolute() and url.scheme in ("http", "https")


@dataclass(frozen=True)
class ServiceRecord:
    service_name: str
    endpoint_url: str
    wsdl_url: str
    registered_at: int = 0

    def validate(self) -> None:
        errors = []

        if not self.service_name or "/" in self.service_name or self.service_name.strip() != self.service_name:
            errors.append("service_name must be a non-empty path segment")
        if not self.endpoint_url or not _is_absolute_url(self.endpoint_url):
            errors.append("endpoint_url must be an absolute http(s) URL")
        if not self.wsdl_url or not _is_absolute_url(self.wsdl_url):
            errors.append("wsdl_url must be an absolute http(s) URL")

        if errors:
            raise RegistryValidationError("; ".join(errors))

    def to_fields(self) -> Dict[str, str]:
        return {key: str(value) for key, value in asdict(self).items()}


class RegistryDatabase:
    """In-memory service registry with optional JSON-lines snapshot."""

    def __init__(self, snapshot_path: Optional[Union[str, Path]] = None):
        self.snapshot_path = Path(snapshot_path) if snapshot_path else None
        self._records: Dict[str, ServiceRecord] = {}
        self._lock = asyncio.Lock()

    # ==================== REGISTRY OPERATIONS ====================
    async def publish(self, record: ServiceRecord) -> ServiceRecord:
        """Insert or replace a record; the broker stamps registered_at."""
        record.validate()
        stamped = replace(record, registered_at=now_ms())
        async with self._lock:
            replaced = stamped.service_name in self._records
            self._records[stamped.service_name] = stamped
        logger.info(
            f"✅ Service {'re-' if replaced else ''}published: {stamped.service_name} -> {stamped.endpoint_url}"
        )
        return stamped

    async def lookup(self, service_name: str) -> ServiceRecord:
        async with self._lock:
            record = self._records.get(service_name)
        if record is None:
            raise ServiceNotFoundError(service_name)
        return record

    async def list_services(self) -> List[ServiceRecord]:
        async with self._lock:
            records = list(self._records.values())
        return sorted(records, key=lambda r: r.service_name)

    async def unregister(self, service_name: str) -> ServiceRecord:
        async with self._lock:
            record = self._records.pop(service_name, None)
        if record is None:
            logger.warning(f"⚠️ Service not found for unregister: {service_name}")
            raise ServiceNotFoundError(service_name)
        logger.info(f"✅ Service unregistered: {service_name}")
        return record

    async def count(self) -> int:
        async with self._lock:
            return len(self._records)

    # ==================== SNAPSHOT ====================
    def load_snapshot(self) -> int:
        """Load records from the snapshot file, skipping bad lines."""
        if not self.snapshot_path or not self.snapshot_path.exists():
            return 0

        loaded = 0
        try:
            lines = self.snapshot_path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            logger.error(f"❌ Failed to read registry snapshot {self.snapshot_path}: {e}")
            return 0

        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                record = ServiceRecord(
                    service_name=data["service_name"],
                    endpoint_url=data["endpoint_url"],
                    wsdl_url=data["wsdl_url"],
                    registered_at=int(data.get("registered_at", 0)),
                )
                record.validate()
            except (ValueError, KeyError, TypeError) as e:
                logger.warning(f"⚠️ Skipping snapshot line {number}: {e}")
                continue
            self._records[record.service_name] = record
            loaded += 1

        logger.info(f"✅ Loaded {loaded} services from {self.snapshot_path}")
        return loaded

    def save_snapshot(self) -> bool:
        """Write every record as one JSON object per line."""
        if not self.snapshot_path:
            return False
        try:
            self.snapshot_path.parent.mkdir(parents=True, exist_ok=True)
            records = sorted(self._records.values(), key=lambda r: r.service_name)
            self.snapshot_path.write_text(
                "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in records),
                encoding="utf-8",
            )
            logger.info(f"✅ Registry snapshot written: {len(records)} services -> {self.snapshot_path}")
            return True
        except OSError as e:
            logger.error(f"❌ Failed to write registry snapshot {self.snapshot_path}: {e}")
            return False
