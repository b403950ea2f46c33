"""
Client side of the HTTP binding: one generic exchange plus SOAP POST.
"""

import asyncio
from dataclasses import dataclass, field
from typing import Optional

import aiohttp
from multidict import CIMultiDict

from config import get_logger
from errors import (
    BodyEncodingError,
    ConnectFailureError,
    SoapProtocolError,
    TransportError,
    TransportTimeoutError,
)

logger = get_logger(__name__)

SOAP_CONTENT_TYPE = "text/xml; charset=utf-8"
METHODS_WITH_BODY = frozenset({"POST", "PUT"})
METHODS = frozenset({"GET", "DELETE"}) | METHODS_WITH_BODY


@dataclass
class HttpExchange:
    """One HTTP request or response. Header names are case-insensitive."""

    method: str = "GET"
    url: str = ""
    headers: CIMultiDict = field(default_factory=CIMultiDict)
    body: Optional[bytes] = None
    status: Optional[int] = None

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method not in METHODS:
            raise TransportError(f"unsupported HTTP method {self.method}")
        if not isinstance(self.headers, CIMultiDict):
            self.headers = CIMultiDict(self.headers)
        if self.status is None and (self.body is not None) != (self.method in METHODS_WITH_BODY):
            raise TransportError(f"{self.method} request body presence is invalid")

    @property
    def text(self) -> str:
        try:
            return (self.body or b"").decode("utf-8")
        except UnicodeDecodeError as e:
            raise BodyEncodingError(f"{self.method} {self.url} body is not UTF-8: {e}") from e

    @property
    def is_xml(self) -> bool:
        content_type = self.headers.get("Content-Type")
        if content_type:
            return "xml" in content_type.lower()
        # no header, sniff the body
        return (self.body or b"").lstrip().startswith(b"<")


def soap_action(service_name: str, operation: str) -> str:
    """Quoted SOAPAction header value."""
    return f'"urn:cmx:{service_name}#{operation}"'


async def exchange(session: aiohttp.ClientSession, request: HttpExchange, timeout: float) -> HttpExchange:
    """
    Perform one HTTP exchange.

    Args:
        session: Open client session.
        request: Request to send.
        timeout: Total timeout in seconds.

    Returns:
        HttpExchange: The response, with ``status`` set.
    """
    try:
        async with session.request(
            request.method,
            request.url,
            headers=request.headers,
            data=request.body,
            timeout=aiohttp.ClientTimeout(total=timeout),
        ) as resp:
            body = await resp.read()
            return HttpExchange(
                method=request.method,
                url=str(resp.url),
                headers=CIMultiDict(resp.headers),
                body=body,
                status=resp.status,
            )
    except asyncio.TimeoutError as e:
        raise TransportTimeoutError(f"{request.method} {request.url} timed out after {timeout}s") from e
    except aiohttp.ClientConnectionError as e:
        raise ConnectFailureError(f"{request.method} {request.url} failed: {e}") from e
    except aiohttp.ClientError as e:
        raise TransportError(f"{request.method} {request.url} failed: {e}") from e


async def soap_post(
    session: aiohttp.ClientSession,
    endpoint_url: str,
    envelope_text: str,
    soap_action_value: str,
    timeout: float,
) -> str:
    """POST a SOAP envelope and return the response envelope text."""
    if not envelope_text:
        raise TransportError("refusing to POST an empty envelope")

    request = HttpExchange(
        method="POST",
        url=endpoint_url,
        headers={"Content-Type": SOAP_CONTENT_TYPE, "SOAPAction": soap_action_value},
        body=envelope_text.encode("utf-8"),
    )
    response = await exchange(session, request, timeout)

    if response.status == 200:
        return response.text
    if response.status == 500 and response.is_xml:
        logger.debug(f"SOAP fault returned by {endpoint_url}")
        return response.text
    raise SoapProtocolError(response.status, f"POST {endpoint_url} returned HTTP {response.status}")
