"""
key=value text bodies used by the broker HTTP API.
"""

from typing import Dict, List

from database import ServiceRecord
from errors import RegistryValidationError

RECORD_KEYS = ("service_name", "endpoint_url", "wsdl_url", "registered_at")


def parse_fields(text: str) -> Dict[str, str]:
    fields: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise RegistryValidationError(f"line {number} is not key=value: {line!r}")
        fields[key.strip()] = value.strip()
    return fields


def format_record(record: ServiceRecord) -> str:
    values = record.to_fields()
    return "".join(f"{key}={values[key]}\n" for key in RECORD_KEYS)


def format_records(records: List[ServiceRecord]) -> str:
    return "\n".join(format_record(r) for r in records)


def parse_record(text: str) -> ServiceRecord:
    fields = parse_fields(text)
    try:
        return ServiceRecord(
            service_name=fields["service_name"],
            endpoint_url=fields["endpoint_url"],
            wsdl_url=fields["wsdl_url"],
            registered_at=int(fields.get("registered_at", 0)),
        )
    except (KeyError, ValueError) as e:
        raise RegistryValidationError(f"incomplete service record: {e}") from e


def parse_records(text: str) -> List[ServiceRecord]:
    blocks = [block for block in text.split("\n\n") if block.strip()]
    return [parse_record(block) for block in blocks]
