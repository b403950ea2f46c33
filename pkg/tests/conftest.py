import aiohttp
import pytest

from broker.node import BrokerNode
from provider import CompressMode, GeneratorSpec, ProviderConfig, WSPProvider


@pytest.fixture
async def broker():
    node = BrokerNode(port=0, snapshot_path=None, name="test-registry")
    assert await node.start()
    yield node
    await node.stop()


@pytest.fixture
async def session():
    async with aiohttp.ClientSession() as s:
        yield s


@pytest.fixture
async def start_provider(broker):
    """Factory for providers registered at the test broker; all are stopped on teardown."""
    started = []

    async def _start(mode=CompressMode.ALWAYS, records=20, service="MsgService", seed=42, **kwargs):
        kwargs.setdefault("payload_spec", GeneratorSpec(records, seed))
        provider = WSPProvider(
            ProviderConfig(
                service_name=service,
                listen_port=0,
                broker_url=broker.base_url,
                compress_mode=mode,
                publish_attempts=1,
                **kwargs,
            )
        )
        assert await provider.start()
        started.append(provider)
        return provider

    yield _start
    for provider in started:
        await provider.stop()
