from .database import RegistryDatabase, ServiceRecord, now_ms

__all__ = ["RegistryDatabase", "ServiceRecord", "now_ms"]
