from typing import Dict

from aiohttp import web

from broker.text import format_record, format_records, parse_fields
from config import get_logger
from database import RegistryDatabase, ServiceRecord
from errors import RegistryValidationError, ServiceNotFoundError
from transport.server import Handler

logger = get_logger(__name__)

SERVICES_PREFIX = "/services"


def _text(body: str, status: int = 200) -> web.Response:
    return web.Response(status=status, text=body, charset="utf-8")


def registry_routes(db: RegistryDatabase) -> Dict[str, Handler]:
    """Route table for the broker's HTTP API."""

    async def services_handler(request: web.Request) -> web.Response:
        rest = request.path[len(SERVICES_PREFIX):]
        if rest and not rest.startswith("/"):
            return _text(f"no route for {request.path}\n", 404)
        name = rest.strip("/")

        if not name:
            if request.method != "GET":
                return _text("method not allowed\n", 405)
            return _text(format_records(await db.list_services()))

        if "/" in name:
            return _text(f"no route for {request.path}\n", 404)

        if request.method == "PUT":
            try:
                fields = parse_fields(await request.text())
                record = ServiceRecord(
                    service_name=name,
                    endpoint_url=fields.get("endpoint_url", ""),
                    wsdl_url=fields.get("wsdl_url", ""),
                )
                stamped = await db.publish(record)
            except (RegistryValidationError, UnicodeDecodeError) as e:
                logger.warning(f"⚠️ Rejected publish for {name}: {e}")
                return _text(f"invalid record: {e}\n", 400)
            return _text(format_record(stamped))

        if request.method == "GET":
            try:
                return _text(format_record(await db.lookup(name)))
            except ServiceNotFoundError as e:
                return _text(f"{e}\n", 404)

        if request.method == "DELETE":
            try:
                await db.unregister(name)
            except ServiceNotFoundError as e:
                return _text(f"{e}\n", 404)
            return _text(f"unregistered={name}\n")

        return _text("method not allowed\n", 405)

    return {SERVICES_PREFIX: services_handler}
