from dataclasses import dataclass
from typing import Optional

from bench.timing import COMPRESSED, PLAIN, TransactionTiming, elapsed_us, timer_stamp
from codec import CodecParams, compress, serialize_tokens
from config import DEFAULT_OPERATION, get_logger
from envelope import MessagePayload, SoapEnvelope, SoapFault, SoapRequest, payload_text
from errors import CmxError, EnvelopeError, PayloadNotRepresentableError
from provider.generator import generate_message
from provider.settings import CompressMode, ProviderConfig

logger = get_logger(__name__)

SUPPORTED_OPERATIONS = (DEFAULT_OPERATION,)


def should_compress(payload: MessagePayload, config: ProviderConfig) -> bool:
    if config.compress_mode is CompressMode.ALWAYS:
        return True
    if config.compress_mode is CompressMode.NEVER:
        return False
    return len(payload.data) >= config.compress_threshold


def normal_msg_handler(
    payload: MessagePayload,
    operation: str = DEFAULT_OPERATION,
    transaction_id: Optional[str] = None,
) -> SoapEnvelope:
    """Wrap the payload verbatim; unrepresentable bytes become a Server fault."""
    try:
        payload_text(payload)
    except PayloadNotRepresentableError as e:
        logger.warning(f"⚠️ Plain payload rejected: {e}")
        return SoapEnvelope(fault=SoapFault("Server", str(e)), operation=operation, transaction_id=transaction_id)
    return SoapEnvelope(payload=payload, operation=operation, transaction_id=transaction_id)


def compress_msg_handler(
    payload: MessagePayload,
    params: CodecParams,
    operation: str = DEFAULT_OPERATION,
    transaction_id: Optional[str] = None,
) -> SoapEnvelope:
    block = serialize_tokens(compress(payload.data, params))
    return SoapEnvelope(
        compressed=True,
        compressed_block=block,
        original_size=len(payload.data),
        operation=operation,
        transaction_id=transaction_id,
    )


@dataclass
class Dispatch:
    envelope: SoapEnvelope
    timing: TransactionTiming


class Controller:
    """Routes getMessage requests to the normal or compress handler."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def _fault(self, code: str, reason: str, request: SoapRequest, timing: TransactionTiming) -> Dispatch:
        try:
            envelope = SoapEnvelope(
                fault=SoapFault(code, reason),
                operation=request.operation,
                transaction_id=request.transaction_id,
            )
        except EnvelopeError:
            envelope = SoapEnvelope(fault=SoapFault(code, reason), transaction_id=request.transaction_id)
        return Dispatch(envelope, timing)

    def dispatch(self, request: SoapRequest) -> Dispatch:
        timing = TransactionTiming(
            transaction_id=_as_int(request.transaction_id),
            record_count=self.config.payload_spec.record_count,
        )
        timing.mark_absent("compress")

        if request.operation not in SUPPORTED_OPERATIONS:
            logger.warning(f"⚠️ Unsupported operation requested: {request.operation}")
            return self._fault("Client", f"unsupported operation {request.operation}", request, timing)

        try:
            before = timer_stamp("generate")
            payload = generate_message(self.config.payload_spec)
            generated = timer_stamp("generate")
            timing.set_stage("generate", elapsed_us(before, generated))
            timing.payload_bytes = len(payload.data)

            if should_compress(payload, self.config):
                envelope = compress_msg_handler(
                    payload, self.config.codec_params, request.operation, request.transaction_id
                )
                timing.set_stage("compress", elapsed_us(generated, timer_stamp("compress")))
                timing.mode = COMPRESSED
            else:
                envelope = normal_msg_handler(payload, request.operation, request.transaction_id)
                timing.mode = PLAIN
        except CmxError as e:
            logger.error(f"❌ Dispatch failed for {request.operation}: {e}")
            return self._fault("Server", str(e), request, timing)

        return Dispatch(envelope, timing)


def _as_int(value: Optional[str]) -> int:
    try:
        return int(value) if value is not None else 0
    except ValueError:
        return 0
