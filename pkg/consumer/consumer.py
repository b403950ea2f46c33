"""
Requester side of the exchange.

Each transaction looks the service up at the broker, invokes the provider
through the receiver proxy, validates the response in ``on_message``
(decompressing when the envelope says so) and finally consumes the payload.
"""

import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional, Tuple

import aiohttp

from bench.timing import COMPRESSED, PLAIN, PROVIDER_STAGES, TransactionTiming, elapsed_us, timer_stamp
from broker.client import BrokerClient
from codec import CodecParams, decompress, deserialize_tokens
from config import BROKER_PORT, DEFAULT_OPERATION, HOST, REQUEST_TIMEOUT_MS, get_logger
from database import ServiceRecord
from envelope import MessagePayload, SoapEnvelope, build_request, parse_envelope
from errors import (
    BrokerUnavailableError,
    CmxError,
    CodecError,
    ConfigError,
    EnvelopeError,
    FaultReceivedError,
    RegistryValidationError,
    ServiceNotFoundError,
    SizeMismatchError,
    TransactionError,
    TransportError,
)
from helper_func import fnv1a_64, format_digest
from transport.http import soap_action, soap_post

logger = get_logger(__name__)


@dataclass
class ConsumerConfig:
    broker_url: str = f"http://{HOST}:{BROKER_PORT}"
    service_name: str = "MsgService"
    iterations: int = 1
    codec_params: CodecParams = field(default_factory=CodecParams)
    request_timeout: int = REQUEST_TIMEOUT_MS  # milliseconds
    consecutive_failure_limit: int = 3
    operation: str = DEFAULT_OPERATION
    first_transaction_id: int = 1

    def __post_init__(self):
        errors = []
        if self.iterations < 1:
            errors.append(f"iterations must be >= 1, got {self.iterations}")
        if self.request_timeout <= 0:
            errors.append(f"request_timeout must be > 0, got {self.request_timeout}")
        if self.consecutive_failure_limit < 1:
            errors.append("consecutive_failure_limit must be >= 1")
        if not self.service_name:
            errors.append("service_name must not be empty")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def timeout_seconds(self) -> float:
        return self.request_timeout / 1000


class Consumption(NamedTuple):
    length: int
    digest: str


def normalize_content_type(content_type: Optional[str]) -> str:
    """``Text/XML; charset=UTF-8`` -> ``text/xml``."""
    media = (content_type or "").split(";", 1)[0].strip().lower()
    return media or "text/xml"


class WSConsumer:
    """Consumer web service client. One instance runs its transactions sequentially."""

    def __init__(
        self,
        config: ConsumerConfig,
        session: Optional[aiohttp.ClientSession] = None,
        transaction_ids: Optional[Iterator[int]] = None,
    ):
        self.config = config
        self._session = session
        self._owns_session = session is None
        self._broker: Optional[BrokerClient] = None
        self.transaction_ids = transaction_ids or itertools.count(config.first_transaction_id)

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

    @property
    def broker(self) -> BrokerClient:
        if self._broker is None:
            self._broker = BrokerClient(
                self.config.broker_url, session=self.session, timeout_ms=self.config.request_timeout
            )
        return self._broker

    async def close(self) -> None:
        if self._owns_session and self._session is not None and not self._session.closed:
            await self._session.close()

    # ==================== STAGES ====================
    async def lookup_service(self) -> ServiceRecord:
        """
        Ask the broker where ``config.service_name`` lives.

        Raises:
            ServiceNotFoundError: The broker has no such service.
            BrokerUnavailableError: The broker could not be reached.
        """
        record = await self.broker.lookup(self.config.service_name)
        logger.debug(f"🔎 {record.service_name} resolved to {record.endpoint_url}")
        return record

    async def ws_receiver_proxy(
        self,
        record: ServiceRecord,
        operation: str = DEFAULT_OPERATION,
        transaction_id: Optional[int] = None,
    ) -> str:
        """Invoke ``operation`` on the provider and return the response body verbatim."""
        request = build_request(operation, None if transaction_id is None else str(transaction_id))
        return await soap_post(
            self.session,
            record.endpoint_url,
            request,
            soap_action(record.service_name, operation),
            self.config.timeout_seconds,
        )

    @staticmethod
    def parse_message(raw: str) -> SoapEnvelope:
        envelope = parse_envelope(raw)
        if envelope.is_fault:
            raise FaultReceivedError(envelope.fault.code, envelope.fault.reason)
        return envelope

    @staticmethod
    def cast_message(envelope: SoapEnvelope, params: Optional[CodecParams] = None) -> MessagePayload:
        """Turn a parsed envelope into a plain payload, decompressing if needed."""
        if not envelope.compressed:
            return MessagePayload(envelope.payload.data, normalize_content_type(envelope.payload.content_type))

        data = decompress(deserialize_tokens(envelope.compressed_block), params)
        if len(data) != envelope.original_size:
            raise SizeMismatchError(envelope.original_size, len(data))
        return MessagePayload(data, "text/xml")

    def on_message(self, raw: str, params: Optional[CodecParams] = None) -> MessagePayload:
        """
        Validate a response and cast it to a plain payload.

        Raises:
            EnvelopeError: The response is not a usable envelope.
            FaultReceivedError: The provider answered with a SOAP Fault.
            MalformedStreamError: The compressed block does not decode.
            SizeMismatchError: Decompressed length differs from originalSize.
        """
        return self.cast_message(self.parse_message(raw), params or self.config.codec_params)

    @staticmethod
    def consume(payload: MessagePayload, timing: Optional[TransactionTiming] = None) -> Consumption:
        consumption = Consumption(len(payload.data), format_digest(fnv1a_64(payload.data)))
        if timing is not None:
            timing.payload_bytes = consumption.length
            timing.digest = consumption.digest
        return consumption

    @staticmethod
    @contextmanager
    def timer(timing: TransactionTiming, stage: str):
        """Record the wall time of the enclosed block as ``stage``."""
        before = timer_stamp(stage)
        try:
            yield
        finally:
            timing.set_stage(stage, elapsed_us(before, timer_stamp(stage)))

    # ==================== TRANSACTIONS ====================
    async def ws_provider_service(
        self,
        transaction_id: Optional[int] = None,
        timing: Optional[TransactionTiming] = None,
    ) -> Tuple[MessagePayload, TransactionTiming]:
        """
        Run one full transaction: lookup, invoke, parse, decompress, consume.

        Raises:
            TransactionError: Carries the failing stage; ``timing`` is marked failed.
        """
        if transaction_id is None:
            transaction_id = next(self.transaction_ids)
        if timing is None:
            timing = TransactionTiming(transaction_id=transaction_id)
        timing.mark_absent(*PROVIDER_STAGES)

        stage = "lookup"
        try:
            with self.timer(timing, "lookup"):
                record = await self.lookup_service()

            stage = "invoke"
            with self.timer(timing, "invoke"):
                raw = await self.ws_receiver_proxy(record, self.config.operation, transaction_id)
                timing.wire_bytes = len(raw.encode("utf-8"))
                stage = "parse"
                envelope = self.parse_message(raw)
                if envelope.transaction_id not in (None, str(transaction_id)):
                    raise EnvelopeError(
                        f"response carries transaction {envelope.transaction_id}, expected {transaction_id}"
                    )

            if envelope.compressed:
                timing.mode = COMPRESSED
                stage = "decompress"
                with self.timer(timing, "decompress"):
                    payload = self.cast_message(envelope, self.config.codec_params)
            else:
                timing.mode = PLAIN
                payload = self.cast_message(envelope)
                timing.mark_absent("compress", "decompress")

            stage = "consume"
            with self.timer(timing, "consume"):
                self.consume(payload, timing)
        except (ServiceNotFoundError, BrokerUnavailableError, RegistryValidationError) as e:
            raise self._failed(timing, "lookup", e) from e
        except TransportError as e:
            raise self._failed(timing, "invoke", e) from e
        except (EnvelopeError, FaultReceivedError) as e:
            raise self._failed(timing, "parse", e) from e
        except (CodecError, SizeMismatchError) as e:
            raise self._failed(timing, "decompress", e) from e
        except CmxError as e:
            raise self._failed(timing, stage, e) from e

        logger.debug(f"✅ Transaction {transaction_id} consumed {timing.payload_bytes} bytes ({timing.mode})")
        return payload, timing

    @staticmethod
    def _failed(timing: TransactionTiming, stage: str, cause: BaseException) -> TransactionError:
        timing.fail(stage)
        logger.warning(f"⚠️ Transaction {timing.transaction_id} failed at {stage}: {cause}")
        return TransactionError(stage, cause)

    async def poll_until_done(self) -> List[TransactionTiming]:
        """
        Run ``config.iterations`` transactions, stopping early after
        ``consecutive_failure_limit`` failures in a row. Failures are returned
        as rows, not raised.
        """
        timings: List[TransactionTiming] = []
        consecutive_failures = 0

        for _ in range(self.config.iterations):
            timing = TransactionTiming(transaction_id=next(self.transaction_ids))
            try:
                await self.ws_provider_service(timing.transaction_id, timing)
                consecutive_failures = 0
            except TransactionError:
                consecutive_failures += 1
            timings.append(timing)

            if consecutive_failures >= self.config.consecutive_failure_limit:
                logger.error(
                    f"❌ Stopping after {consecutive_failures} consecutive failures "
                    f"({len(timings)}/{self.config.iterations} transactions run)"
                )
                break

        ok = sum(1 for t in timings if t.ok)
        logger.info(f"📊 {ok}/{len(timings)} transactions succeeded for {self.config.service_name}")
        return timings
