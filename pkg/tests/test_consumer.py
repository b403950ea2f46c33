import asyncio

import pytest
from aiohttp import web

from bench.timing import COMPRESSED, PLAIN
from codec import compress, serialize_tokens
from consumer import ConsumerConfig, WSConsumer, normalize_content_type
from database import ServiceRecord
from envelope import MessagePayload, build_envelope, build_fault
from errors import (
    BrokerUnavailableError,
    ConfigError,
    ConnectFailureError,
    EnvelopeError,
    FaultReceivedError,
    MalformedStreamError,
    ServiceNotFoundError,
    SizeMismatchError,
    TransactionError,
    TransportTimeoutError,
)
from helper_func import FNV64_OFFSET_BASIS, fnv1a_64, format_digest
from provider import CompressMode, GeneratorSpec, generate_message
from transport import serve


def compressed(data: bytes, original_size=None) -> str:
    return build_envelope(
        serialize_tokens(compress(data)),
        compressed=True,
        original_size=len(data) if original_size is None else original_size,
    )


@pytest.fixture
def consumer_for(broker, session):
    def _make(service="MsgService", **kwargs):
        config = ConsumerConfig(broker_url=broker.base_url, service_name=service, **kwargs)
        return WSConsumer(config, session=session)

    return _make


# ==================== CONFIG ====================
@pytest.mark.parametrize(
    "kwargs",
    [{"iterations": 0}, {"request_timeout": 0}, {"consecutive_failure_limit": 0}, {"service_name": ""}],
)
def test_invalid_consumer_config(kwargs):
    with pytest.raises(ConfigError):
        ConsumerConfig(**kwargs)


# ==================== ON MESSAGE ====================
def test_on_message_plain():
    consumer = WSConsumer(ConsumerConfig())
    assert consumer.on_message(build_envelope(MessagePayload(b"hi"))).data == b"hi"


def test_on_message_compressed():
    consumer = WSConsumer(ConsumerConfig())
    payload = consumer.on_message(compressed(b"A" * 1024))
    assert payload.data == b"A" * 1024
    assert payload.content_type == "text/xml"


def test_on_message_identity_over_corpus():
    consumer = WSConsumer(ConsumerConfig())
    for n in (0, 1, 10, 200):
        data = generate_message(GeneratorSpec(record_count=n, seed=n)).data
        assert consumer.on_message(compressed(data)).data == data
        assert consumer.on_message(build_envelope(MessagePayload(data))).data == data


def test_on_message_size_mismatch():
    consumer = WSConsumer(ConsumerConfig())
    with pytest.raises(SizeMismatchError) as info:
        consumer.on_message(compressed(b"A" * 1024, original_size=1025))
    assert (info.value.expected, info.value.actual) == (1025, 1024)


def test_on_message_fault():
    consumer = WSConsumer(ConsumerConfig())
    with pytest.raises(FaultReceivedError) as info:
        consumer.on_message(build_fault("Server", "no payload"))
    assert info.value.faultcode == "Server"


def test_on_message_malformed():
    consumer = WSConsumer(ConsumerConfig())
    with pytest.raises(EnvelopeError):
        consumer.on_message("<html/>")
    bad_block = build_envelope(b"CMX2" + b"\x00" * 8, compressed=True, original_size=0)
    with pytest.raises(MalformedStreamError):
        consumer.on_message(bad_block)


def test_normalize_content_type():
    assert normalize_content_type("Text/XML; charset=UTF-8") == "text/xml"
    assert normalize_content_type("") == "text/xml"


# ==================== CONSUME ====================
def test_consume_empty_payload():
    report = WSConsumer.consume(MessagePayload(b""))
    assert report.length == 0
    assert report.digest == format_digest(FNV64_OFFSET_BASIS)


def test_consume_is_deterministic():
    payload = MessagePayload(b"<records/>")
    assert WSConsumer.consume(payload) == WSConsumer.consume(payload)
    assert WSConsumer.consume(payload).digest == format_digest(fnv1a_64(b"<records/>"))


def test_consume_records_length_for_equal_sized_payloads():
    a = WSConsumer.consume(MessagePayload(b"abcd"))
    b = WSConsumer.consume(MessagePayload(b"abce"))
    assert a.length == b.length == 4


# ==================== LOOKUP / PROXY ====================
async def test_lookup_published_service(start_provider, consumer_for):
    provider = await start_provider()
    record = await consumer_for().lookup_service()
    assert record.endpoint_url == provider.endpoint_url


async def test_lookup_absent_service(broker, consumer_for):
    with pytest.raises(ServiceNotFoundError):
        await consumer_for("Ghost").lookup_service()


async def test_lookup_broker_down(broker, consumer_for):
    consumer = consumer_for(request_timeout=1000)
    await broker.stop()
    with pytest.raises(BrokerUnavailableError):
        await consumer.lookup_service()


async def test_proxy_returns_envelope_text(start_provider, consumer_for):
    await start_provider()
    consumer = consumer_for()
    raw = await consumer.ws_receiver_proxy(await consumer.lookup_service(), "getMessage", 1)
    assert raw.startswith("<?xml")
    assert "Envelope" in raw


async def test_proxy_connection_refused(start_provider, consumer_for):
    provider = await start_provider()
    consumer = consumer_for()
    record = await consumer.lookup_service()
    await provider.stop()
    with pytest.raises(ConnectFailureError):
        await consumer.ws_receiver_proxy(record)


async def test_proxy_timeout(consumer_for):
    async def stall(request):
        await asyncio.sleep(2)
        return web.Response(text="late")

    handle = await serve({"/ws/": stall}, 0, name="stall")
    try:
        record = ServiceRecord("Slow", f"{handle.base_url}/ws/Slow", f"{handle.base_url}/ws/Slow?wsdl")
        with pytest.raises(TransportTimeoutError):
            await consumer_for(request_timeout=200).ws_receiver_proxy(record)
    finally:
        await handle.shutdown()


# ==================== TRANSACTIONS ====================
async def test_transaction_compressed_identity(start_provider, consumer_for):
    await start_provider(mode=CompressMode.ALWAYS, records=40)
    payload, timing = await consumer_for().ws_provider_service(transaction_id=1)
    expected = generate_message(GeneratorSpec(40, 42)).data
    assert payload.data == expected
    assert timing.ok
    assert timing.mode == COMPRESSED
    assert "decompress" not in timing.absent
    assert timing.digest == format_digest(fnv1a_64(expected))
    assert timing.payload_bytes == len(expected)
    assert timing.wire_bytes > 0


async def test_transaction_plain_identity(start_provider, consumer_for):
    await start_provider(mode=CompressMode.NEVER, records=40)
    payload, timing = await consumer_for().ws_provider_service(transaction_id=2)
    assert payload.data == generate_message(GeneratorSpec(40, 42)).data
    assert timing.mode == PLAIN
    assert {"compress", "decompress"} <= timing.absent
    assert timing.t_decompress == 0


async def test_transaction_absent_service_fails_at_lookup(broker, consumer_for):
    with pytest.raises(TransactionError) as info:
        await consumer_for("Ghost").ws_provider_service(transaction_id=3)
    assert info.value.stage == "lookup"
    assert isinstance(info.value.cause, ServiceNotFoundError)


async def test_transaction_fault_fails_at_parse(start_provider, consumer_for):
    await start_provider(payload_spec=GeneratorSpec(template_id="missing"))
    with pytest.raises(TransactionError) as info:
        await consumer_for().ws_provider_service(transaction_id=4)
    assert info.value.stage == "parse"
    assert isinstance(info.value.cause, FaultReceivedError)


async def test_transaction_bad_block_fails_at_decompress(broker, consumer_for):
    async def liar(request):
        return web.Response(text=compressed(b"B" * 64, original_size=65), content_type="text/xml")

    handle = await serve({"/ws/": liar}, 0, name="liar")
    try:
        await consumer_for().broker.publish(
            ServiceRecord("MsgService", f"{handle.base_url}/ws/MsgService", f"{handle.base_url}/ws/MsgService?wsdl")
        )
        with pytest.raises(TransactionError) as info:
            await consumer_for().ws_provider_service(transaction_id=5)
        assert info.value.stage == "decompress"
    finally:
        await handle.shutdown()


async def test_poll_until_done_healthy(start_provider, consumer_for):
    await start_provider(mode=CompressMode.AUTO, records=10)
    timings = await consumer_for(iterations=5).poll_until_done()
    assert len(timings) == 5
    assert all(t.ok for t in timings)
    assert [t.transaction_id for t in timings] == [1, 2, 3, 4, 5]
    assert len({t.digest for t in timings}) == 1


async def test_poll_until_done_single_iteration(start_provider, consumer_for):
    await start_provider()
    assert len(await consumer_for(iterations=1).poll_until_done()) == 1


async def test_poll_until_done_stops_after_consecutive_failures(broker, consumer_for):
    calls = 0

    async def flaky(request):
        nonlocal calls
        calls += 1
        if calls > 2:
            return web.Response(status=503, text="gone")
        return web.Response(text=build_envelope(MessagePayload(b"<records></records>")), content_type="text/xml")

    handle = await serve({"/ws/": flaky}, 0, name="flaky")
    try:
        consumer = consumer_for(iterations=10)
        await consumer.broker.publish(
            ServiceRecord("MsgService", f"{handle.base_url}/ws/MsgService", f"{handle.base_url}/ws/MsgService?wsdl")
        )
        timings = await consumer.poll_until_done()
    finally:
        await handle.shutdown()

    assert [t.outcome for t in timings] == ["ok", "ok"] + ["failed(invoke)"] * 3
    assert calls == 5


async def serve_as_service(consumer: WSConsumer, handler, name: str):
    handle = await serve({"/ws/": handler}, 0, name=name)
    url = f"{handle.base_url}/ws/MsgService"
    await consumer.broker.publish(ServiceRecord("MsgService", url, f"{url}?wsdl"))
    return handle


async def test_non_utf8_response_becomes_failed_row(broker, consumer_for):
    async def latin1(request):
        body = "<?xml version='1.0' encoding='ISO-8859-1'?><x>café</x>".encode("latin-1")
        return web.Response(body=body, content_type="text/xml")

    consumer = consumer_for(iterations=2)
    handle = await serve_as_service(consumer, latin1, "latin1")
    try:
        timings = await consumer.poll_until_done()
    finally:
        await handle.shutdown()

    assert [t.outcome for t in timings] == ["failed(invoke)", "failed(invoke)"]


async def test_dead_provider_fails_at_invoke(broker, consumer_for):
    async def never_called(request):
        return web.Response(status=500)

    consumer = consumer_for(iterations=1)
    handle = await serve_as_service(consumer, never_called, "dead")
    await handle.shutdown()

    timings = await consumer.poll_until_done()
    assert [t.outcome for t in timings] == ["failed(invoke)"]
    assert timings[0].t_lookup >= 0


async def test_truncated_block_fails_at_decompress(broker, consumer_for):
    data = b"<records>" + b"<record/>" * 50 + b"</records>"
    block = serialize_tokens(compress(data))

    async def truncated(request):
        text = build_envelope(block[:-2], compressed=True, original_size=len(data))
        return web.Response(text=text, content_type="text/xml")

    consumer = consumer_for(iterations=1)
    handle = await serve_as_service(consumer, truncated, "truncated")
    try:
        timings = await consumer.poll_until_done()
    finally:
        await handle.shutdown()

    assert [t.outcome for t in timings] == ["failed(decompress)"]
