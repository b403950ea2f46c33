from .client import BrokerClient
from .node import BrokerNode
from .routes import registry_routes
from .text import format_record, format_records, parse_fields, parse_record, parse_records

__all__ = [
    "BrokerClient",
    "BrokerNode",
    "registry_routes",
    "format_record",
    "format_records",
    "parse_fields",
    "parse_record",
    "parse_records",
]
