from typing import List, Optional

import aiohttp
from yarl import URL

from broker.text import parse_record, parse_records
from config import REQUEST_TIMEOUT_MS, get_logger
from database import ServiceRecord
from errors import (
    BrokerUnavailableError,
    RegistryValidationError,
    ServiceNotFoundError,
    TransportError,
)
from transport.http import HttpExchange, exchange

logger = get_logger(__name__)


class BrokerClient:
    """HTTP client for the broker registry API."""

    def __init__(
        self,
        broker_url: str,
        session: Optional[aiohttp.ClientSession] = None,
        timeout_ms: int = REQUEST_TIMEOUT_MS,
    ):
        self.broker_url = broker_url.rstrip("/")
        self.timeout = timeout_ms / 1000
        self._session = session
        self._owns_session = session is None

    async def __aenter__(self):
        return self

    async def __aexit__(self, *exc):
        await self.close()

    @property
    def session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession()
            self._owns_session = True
        return self._session

    async def close(self) -> None:
        if self._owns_session and self._session is not None and not self._session.closed:
            await self._session.close()

    def _url(self, service_name: Optional[str] = None) -> str:
        url = URL(self.broker_url) / "services"
        if service_name is not None:
            url = url / service_name
        return str(url)

    async def _call(self, method: str, url: str, body: Optional[str] = None) -> HttpExchange:
        request = HttpExchange(
            method=method,
            url=url,
            headers={"Content-Type": "text/plain; charset=utf-8"} if body is not None else {},
            body=body.encode("utf-8") if body is not None else None,
        )
        try:
            response = await exchange(self.session, request, self.timeout)
            response.text  # registry bodies are UTF-8 text
            return response
        except TransportError as e:
            raise BrokerUnavailableError(f"broker {self.broker_url} unreachable: {e}") from e

    async def publish(self, record: ServiceRecord) -> ServiceRecord:
        record.validate()
        body = f"endpoint_url={record.endpoint_url}\nwsdl_url={record.wsdl_url}\n"
        response = await self._call("PUT", self._url(record.service_name), body)
        if response.status == 400:
            raise RegistryValidationError(response.text.strip())
        if response.status != 200:
            raise BrokerUnavailableError(f"publish returned HTTP {response.status}")
        return parse_record(response.text)

    async def lookup(self, service_name: str) -> ServiceRecord:
        response = await self._call("GET", self._url(service_name))
        if response.status == 404:
            raise ServiceNotFoundError(service_name)
        if response.status != 200:
            raise BrokerUnavailableError(f"lookup returned HTTP {response.status}")
        return parse_record(response.text)

    async def list_services(self) -> List[ServiceRecord]:
        response = await self._call("GET", self._url())
        if response.status != 200:
            raise BrokerUnavailableError(f"list returned HTTP {response.status}")
        return parse_records(response.text)

    async def unregister(self, service_name: str) -> None:
        response = await self._call("DELETE", self._url(service_name))
        if response.status == 404:
            raise ServiceNotFoundError(service_name)
        if response.status != 200:
            raise BrokerUnavailableError(f"unregister returned HTTP {response.status}")
