"""
Deterministic XML message generator.

Identical specs always produce identical bytes, so both ends of a
transaction (and repeated benchmark runs) can agree on the expected payload.
"""

import random
from dataclasses import dataclass
from typing import Callable, Dict

from envelope import MessagePayload
from errors import ConfigError, UnknownTemplateError

_CUSTOMERS = ("Amina", "Bello", "Chidi", "Danjuma", "Efe", "Fatima", "Garba", "Hauwa")
_ITEMS = ("notebook", "stapler", "printer-paper", "toner", "marker", "folder", "calculator")
_STATUSES = ("pending", "shipped", "delivered", "cancelled")
_STATIONS = ("maiduguri-01", "kano-02", "yola-03", "damaturu-04")
_METRICS = (("temperature", "celsius"), ("humidity", "percent"), ("pressure", "hectopascal"))


def _order_record(record_id: int, rng: random.Random) -> str:
    return (
        f'<record id="{record_id}">'
        f"<customer>{rng.choice(_CUSTOMERS)}</customer>"
        f"<item>{rng.choice(_ITEMS)}</item>"
        f"<quantity>{rng.randint(1, 99)}</quantity>"
        f"<status>{rng.choice(_STATUSES)}</status>"
        f"</record>"
    )


def _sensor_record(record_id: int, rng: random.Random) -> str:
    metric, unit = rng.choice(_METRICS)
    return (
        f'<record id="{record_id}">'
        f"<station>{rng.choice(_STATIONS)}</station>"
        f"<metric>{metric}</metric>"
        f"<value>{rng.uniform(0, 100):.2f}</value>"
        f"<unit>{unit}</unit>"
        f"</record>"
    )


TEMPLATES: Dict[str, Callable[[int, random.Random], str]] = {
    "order": _order_record,
    "sensor": _sensor_record,
}


@dataclass(frozen=True)
class GeneratorSpec:
    record_count: int = 100
    seed: int = 42
    template_id: str = "order"

    def __post_init__(self):
        if self.record_count < 0:
            raise ConfigError(f"record_count must be >= 0, got {self.record_count}")


def generate_message(spec: GeneratorSpec) -> MessagePayload:
    """Generate ``spec.record_count`` template records under a <records> root."""
    template = TEMPLATES.get(spec.template_id)
    if template is None:
        raise UnknownTemplateError(
            f"unknown template {spec.template_id!r}; known: {', '.join(sorted(TEMPLATES))}"
        )

    rng = random.Random(spec.seed)
    parts = ["<records>"]
    parts.extend(template(i, rng) for i in range(1, spec.record_count + 1))
    parts.append("</records>")
    return MessagePayload(data="".join(parts).encode("utf-8"), content_type="text/xml")
