import asyncio
import csv
import io
import threading
from typing import Dict, List, Optional

from aiohttp import web

from bench.timing import PROVIDER_COLUMNS, TransactionTiming, elapsed_us, provider_rows, timer_stamp
from broker.client import BrokerClient
from config import get_logger
from database import ServiceRecord
from envelope import (
    ServiceDescriptor,
    SoapEnvelope,
    SoapFault,
    SoapRequest,
    generate_wsdl,
    parse_request,
    render_envelope,
)
from errors import BrokerUnavailableError, EnvelopeError, ProviderStartupError
from node import ServiceNode
from provider.controller import SUPPORTED_OPERATIONS, Controller
from provider.settings import ProviderConfig
from transport.server import Handler

logger = get_logger(__name__)


class TimingLog:
    """Append-only provider timing rows, safe to share across threads."""

    def __init__(self):
        self._rows: List[TransactionTiming] = []
        self._lock = threading.Lock()

    def append(self, timing: TransactionTiming) -> None:
        with self._lock:
            self._rows.append(timing)

    def snapshot(self) -> List[TransactionTiming]:
        with self._lock:
            return list(self._rows)

    def __len__(self):
        with self._lock:
            return len(self._rows)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=PROVIDER_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(provider_rows(self.snapshot()))
        return out.getvalue()


async def publish_service(config: ProviderConfig, broker: BrokerClient, record: ServiceRecord) -> ServiceRecord:
    """Register ``record`` at the broker, retrying with doubling backoff."""
    delay = config.publish_backoff_ms / 1000
    for attempt in range(1, config.publish_attempts + 1):
        try:
            stamped = await broker.publish(record)
            logger.info(f"✅ Published {record.service_name} at {config.broker_url} (attempt {attempt})")
            return stamped
        except BrokerUnavailableError as e:
            if attempt == config.publish_attempts:
                raise ProviderStartupError(
                    f"could not publish {record.service_name} after {attempt} attempts: {e}"
                ) from e
            logger.warning(f"⚠️ Publish attempt {attempt} failed: {e}; retrying in {delay:.1f}s")
            await asyncio.sleep(delay)
            delay *= 2
    raise ProviderStartupError("publish_attempts must be >= 1")


class WSPProvider(ServiceNode):
    """The provider web service: serves getMessage, its WSDL and /metrics."""

    role = "provider"

    def __init__(self, config: ProviderConfig, broker: Optional[BrokerClient] = None):
        super().__init__(config.service_name, config.listen_port, config.host)
        self.config = config
        self.controller = Controller(config)
        self.timing_log = TimingLog()
        self.broker = broker
        self._owns_broker = broker is None
        self.wsdl_text: Optional[str] = None
        self.record: Optional[ServiceRecord] = None

    @property
    def endpoint_url(self) -> str:
        return f"http://{self.config.advertise_host}:{self.port}{self.config.endpoint_path()}"

    @property
    def wsdl_url(self) -> str:
        return f"{self.endpoint_url}?wsdl"

    def routes(self) -> Dict[str, Handler]:
        return {"/ws/": self.soap_handler, "/metrics": self.metrics_handler}

    async def on_start(self) -> None:
        descriptor = ServiceDescriptor(
            service_name=self.config.service_name,
            endpoint_url=self.endpoint_url,
            operations=list(SUPPORTED_OPERATIONS),
        )
        self.wsdl_text = generate_wsdl(descriptor)
        logger.info(f"✅ WSDL generated for {self.config.service_name}: {self.wsdl_url}")

        if self.broker is None:
            self.broker = BrokerClient(self.config.broker_url)
        self.record = await publish_service(
            self.config,
            self.broker,
            ServiceRecord(self.config.service_name, self.endpoint_url, self.wsdl_url),
        )

    async def on_stop(self) -> None:
        if self._owns_broker and self.broker is not None:
            await self.broker.close()

    async def metrics_handler(self, request: web.Request) -> web.Response:
        if request.path != "/metrics" or request.method != "GET":
            return web.Response(status=404, text=f"no route for {request.method} {request.path}\n")
        return web.Response(text=self.timing_log.to_csv(), content_type="text/csv", charset="utf-8")

    async def soap_handler(self, request: web.Request) -> web.StreamResponse:
        if request.path != self.config.endpoint_path():
            return web.Response(status=404, text=f"no service at {request.path}\n")

        if request.method == "GET" and "wsdl" in request.query:
            if self.wsdl_text is None:
                return web.Response(status=503, text="WSDL not generated yet\n")
            return web.Response(text=self.wsdl_text, content_type="text/xml", charset="utf-8")

        if request.method != "POST":
            return web.Response(status=405, text="method not allowed\n")

        try:
            soap_request = parse_request(await request.read())
        except EnvelopeError as e:
            logger.warning(f"⚠️ Malformed SOAP request: {e}")
            envelope = SoapEnvelope(fault=SoapFault("Client", str(e)))
            return await self._send(request, envelope, None)

        logger.debug(f"📨 Acknowledged {soap_request.operation} (transaction {soap_request.transaction_id})")
        loop = asyncio.get_running_loop()
        dispatch = await loop.run_in_executor(None, self.controller.dispatch, soap_request)
        return await self._send(request, dispatch.envelope, dispatch.timing, soap_request)

    async def _send(
        self,
        request: web.Request,
        envelope: SoapEnvelope,
        timing: Optional[TransactionTiming],
        soap_request: Optional[SoapRequest] = None,
    ) -> web.StreamResponse:
        before = timer_stamp("publish_send")
        body = render_envelope(envelope).encode("utf-8")

        response = web.StreamResponse(status=500 if envelope.is_fault else 200)
        response.content_type = "text/xml"
        response.charset = "utf-8"
        response.content_length = len(body)
        await response.prepare(request)
        await response.write(body)
        await response.write_eof()

        if timing is not None and soap_request is not None and soap_request.transaction_id is not None:
            timing.set_stage("publish_send", elapsed_us(before, timer_stamp("publish_send")))
            timing.wire_bytes = len(body)
            self.timing_log.append(timing)
        return response


__all__ = ["TimingLog", "WSPProvider", "publish_service"]
