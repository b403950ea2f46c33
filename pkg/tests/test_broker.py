import asyncio

import pytest
from aiohttp import web

from broker import BrokerClient, BrokerNode, format_record, format_records, parse_record, parse_records
from database import RegistryDatabase, ServiceRecord
from errors import BrokerUnavailableError, RegistryValidationError, ServiceNotFoundError
from transport import serve
from transport.http import HttpExchange, exchange


def record(name="MsgService", port=8081):
    endpoint = f"http://127.0.0.1:{port}/ws/{name}"
    return ServiceRecord(name, endpoint, f"{endpoint}?wsdl")


# ==================== REGISTRY ====================
async def test_publish_then_lookup():
    db = RegistryDatabase()
    stamped = await db.publish(record())
    assert stamped.registered_at > 0
    assert await db.lookup("MsgService") == stamped


async def test_lookup_missing():
    with pytest.raises(ServiceNotFoundError):
        await RegistryDatabase().lookup("Nope")


async def test_republish_last_writer_wins():
    db = RegistryDatabase()
    await db.publish(record(port=9000))
    await db.publish(record(port=9001))
    assert (await db.lookup("MsgService")).endpoint_url.endswith(":9001/ws/MsgService")
    assert await db.count() == 1


async def test_list_is_sorted():
    db = RegistryDatabase()
    for name in ("Zeta", "Alpha", "Mid"):
        await db.publish(record(name))
    assert [r.service_name for r in await db.list_services()] == ["Alpha", "Mid", "Zeta"]


async def test_unregister():
    db = RegistryDatabase()
    await db.publish(record())
    await db.unregister("MsgService")
    with pytest.raises(ServiceNotFoundError):
        await db.lookup("MsgService")
    with pytest.raises(ServiceNotFoundError):
        await db.unregister("MsgService")


@pytest.mark.parametrize(
    "bad",
    [
        ServiceRecord("", "http://h/ws/x", "http://h/ws/x?wsdl"),
        ServiceRecord("a/b", "http://h/ws/x", "http://h/ws/x?wsdl"),
        ServiceRecord("Svc", "not a url", "http://h/ws/x?wsdl"),
        ServiceRecord("Svc", "http://h/ws/x", ""),
    ],
)
async def test_publish_validates(bad):
    with pytest.raises(RegistryValidationError):
        await RegistryDatabase().publish(bad)


async def test_concurrent_publish_and_lookup():
    db = RegistryDatabase()

    async def worker(n):
        for i in range(25):
            await db.publish(record(f"Svc{n}", port=9000 + i))
            found = await db.lookup(f"Svc{n}")
            assert found.service_name == f"Svc{n}"

    await asyncio.gather(*(worker(n) for n in range(8)))
    services = await db.list_services()
    assert len(services) == 8
    assert all(r.endpoint_url.startswith("http://127.0.0.1:9024/") for r in services)


async def test_snapshot_round_trip(tmp_path):
    path = tmp_path / "registry.jsonl"
    db = RegistryDatabase(path)
    await db.publish(record("A"))
    await db.publish(record("B"))
    assert db.save_snapshot()

    restored = RegistryDatabase(path)
    assert restored.load_snapshot() == 2
    assert (await restored.lookup("A")).endpoint_url == record("A").endpoint_url


def test_snapshot_skips_bad_lines(tmp_path):
    path = tmp_path / "registry.jsonl"
    path.write_text('{"service_name": "A", "endpoint_url": "http://h/ws/A", "wsdl_url": "http://h/ws/A?wsdl"}\n'
                    "garbage\n"
                    '{"service_name": "B"}\n', encoding="utf-8")
    assert RegistryDatabase(path).load_snapshot() == 1


def test_snapshot_disabled():
    db = RegistryDatabase()
    assert db.load_snapshot() == 0
    assert db.save_snapshot() is False


# ==================== TEXT BODIES ====================
def test_record_text_round_trip():
    r = ServiceRecord("Svc", "http://h:1/ws/Svc", "http://h:1/ws/Svc?wsdl", 1234)
    text = format_record(r)
    assert text.splitlines()[0] == "service_name=Svc"
    assert parse_record(text) == r


def test_records_text_round_trip():
    rs = [record("A"), record("B")]
    assert parse_records(format_records(rs)) == rs
    assert parse_records("") == []


def test_parse_record_incomplete():
    with pytest.raises(RegistryValidationError):
        parse_record("service_name=Svc\n")
    with pytest.raises(RegistryValidationError):
        parse_record("no equals sign")


# ==================== HTTP API ====================
async def test_http_publish_lookup_list_unregister(broker):
    async with BrokerClient(broker.base_url) as client:
        stamped = await client.publish(record())
        assert stamped.registered_at > 0
        assert (await client.lookup("MsgService")).endpoint_url == record().endpoint_url
        assert [r.service_name for r in await client.list_services()] == ["MsgService"]
        await client.unregister("MsgService")
        with pytest.raises(ServiceNotFoundError):
            await client.lookup("MsgService")
        with pytest.raises(ServiceNotFoundError):
            await client.unregister("MsgService")


async def test_http_publish_rejects_invalid(broker, session):
    response = await exchange(
        session,
        HttpExchange(method="PUT", url=f"{broker.base_url}/services/Svc", body=b"endpoint_url=relative\n"),
        timeout=5,
    )
    assert response.status == 400


async def test_http_routes(broker, session):
    async def status(method, path, body=None):
        req = HttpExchange(method=method, url=f"{broker.base_url}{path}", body=body)
        return (await exchange(session, req, timeout=5)).status

    assert await status("GET", "/services") == 200
    assert await status("GET", "/servicesX") == 404
    assert await status("GET", "/services/a/b") == 404
    assert await status("DELETE", "/services") == 405
    assert await status("POST", "/services/Svc", b"x") == 405
    assert await status("GET", "/elsewhere/") == 404


async def test_status_document(broker, session):
    response = await exchange(session, HttpExchange(method="GET", url=f"{broker.base_url}/"), timeout=5)
    assert response.status == 200
    assert '"role": "broker"' in response.text


async def test_concurrent_http_clients(broker):
    async def worker(n):
        async with BrokerClient(broker.base_url) as client:
            for i in range(5):
                await client.publish(record(f"Svc{n}", port=9000 + i))
                assert (await client.lookup(f"Svc{n}")).service_name == f"Svc{n}"

    await asyncio.gather(*(worker(n) for n in range(8)))
    async with BrokerClient(broker.base_url) as client:
        assert len(await client.list_services()) == 8


STRESS_SECONDS = 5.0


def port_of(rec: ServiceRecord) -> int:
    return int(rec.endpoint_url.split(":")[2].split("/")[0])


@pytest.mark.sweep
async def test_time_boxed_stress_keeps_registry_consistent(broker):
    loop = asyncio.get_running_loop()
    deadline = loop.time() + STRESS_SECONDS
    shared_writes = set()

    async def worker(n):
        last_own = None
        async with BrokerClient(broker.base_url) as client:
            i = 0
            while loop.time() < deadline:
                port = 10000 + n * 1000 + i % 1000
                await client.publish(record(f"Svc{n}", port=port))
                shared_writes.add(port)
                await client.publish(record("Shared", port=port))
                last_own = port

                # only this worker writes Svc{n}, so reads must see its latest write
                assert port_of(await client.lookup(f"Svc{n}")) == port
                assert port_of(await client.lookup("Shared")) in shared_writes
                i += 1
        return last_own

    finals = await asyncio.gather(*(worker(n) for n in range(8)))

    async with BrokerClient(broker.base_url) as client:
        services = {r.service_name: r for r in await client.list_services()}
    assert sorted(services) == ["Shared"] + sorted(f"Svc{n}" for n in range(8))
    for n, last in enumerate(finals):
        assert last is not None
        assert port_of(services[f"Svc{n}"]) == last
    assert port_of(services["Shared"]) in finals


async def test_broker_down_is_not_not_found(broker):
    url = broker.base_url
    await broker.stop()
    async with BrokerClient(url, timeout_ms=1000) as client:
        with pytest.raises(BrokerUnavailableError):
            await client.lookup("MsgService")


async def test_non_utf8_registry_body_is_broker_unavailable():
    async def latin1(request):
        return web.Response(body="service_name=Caf\u00e9\n".encode("latin-1"), content_type="text/plain")

    handle = await serve({"/services": latin1}, 0, name="latin1-registry")
    try:
        async with BrokerClient(handle.base_url, timeout_ms=1000) as client:
            with pytest.raises(BrokerUnavailableError):
                await client.lookup("MsgService")
    finally:
        await handle.shutdown()


async def test_broker_snapshot_across_restart(tmp_path):
    path = tmp_path / "snap.jsonl"
    first = BrokerNode(port=0, snapshot_path=str(path))
    assert await first.start()
    async with BrokerClient(first.base_url) as client:
        await client.publish(record())
    await first.stop()

    second = BrokerNode(port=0, snapshot_path=str(path))
    assert await second.start()
    try:
        async with BrokerClient(second.base_url) as client:
            assert (await client.lookup("MsgService")).endpoint_url == record().endpoint_url
    finally:
        await second.stop()
