"""
In-process benchmark: one broker, then one provider per (mode, record_count)
cell, each driven by a consumer over loopback HTTP.
"""

import csv
import io
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import aiohttp

from bench.timing import COMPRESSED, MODES, PLAIN, TransactionTiming
from broker.node import BrokerNode
from codec import CodecParams
from config import HOST, REQUEST_TIMEOUT_MS, get_logger
from consumer import ConsumerConfig, WSConsumer
from errors import BrokerUnavailableError, ConfigError, TransportError
from provider import CompressMode, GeneratorSpec, ProviderConfig, WSPProvider
from transport.http import HttpExchange, exchange

logger = get_logger(__name__)

MODE_TO_COMPRESS = {PLAIN: CompressMode.NEVER, COMPRESSED: CompressMode.ALWAYS}
STARTUP_FAILURE = "failed(startup)"


@dataclass
class BenchConfig:
    iterations: int = 5
    record_counts: List[int] = field(default_factory=lambda: [10, 100, 1000])
    modes: List[str] = field(default_factory=lambda: list(MODES))
    codec_params: CodecParams = field(default_factory=CodecParams)
    seed: int = 42
    output: str = "bench.csv"
    template_id: str = "order"
    service_name: str = "MsgService"
    host: str = HOST
    request_timeout: int = REQUEST_TIMEOUT_MS

    def __post_init__(self):
        errors = []
        if self.iterations < 1:
            errors.append(f"iterations must be >= 1, got {self.iterations}")
        if not self.record_counts:
            errors.append("record_counts must not be empty")
        if any(n < 0 for n in self.record_counts):
            errors.append("record_counts must be >= 0")
        if not self.modes:
            errors.append("modes must not be empty")
        unknown = [m for m in self.modes if m not in MODES]
        if unknown:
            errors.append(f"unknown modes {unknown}; expected a subset of {list(MODES)}")
        if errors:
            raise ConfigError("; ".join(errors))

    def cells(self) -> Iterator[Tuple[str, int]]:
        for record_count in self.record_counts:
            for mode in self.modes:
                yield mode, record_count


_CODEC_KEYS = ("window_size", "lookahead_size", "min_match_len", "initial_read_capacity")
_INT_KEYS = ("iterations", "seed", "request_timeout")
_STR_KEYS = ("output", "template_id", "service_name", "host")


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from e


def parse_bench_config(text: str) -> BenchConfig:
    """Parse ``key=value`` lines; ``#`` comments and blank lines are ignored."""
    kwargs: Dict[str, object] = {}
    codec: Dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))

        if key in _INT_KEYS:
            kwargs[key] = _int(key, value)
        elif key in _STR_KEYS:
            kwargs[key] = value
        elif key in _CODEC_KEYS:
            codec[key] = _int(key, value)
        elif key == "record_counts":
            kwargs[key] = [_int(key, v.strip()) for v in value.split(",") if v.strip()]
        elif key == "modes":
            kwargs[key] = [v.strip().lower() for v in value.split(",") if v.strip()]
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    if codec:
        kwargs["codec_params"] = CodecParams(**codec)
    return BenchConfig(**kwargs)


def load_bench_config(path: Union[str, Path]) -> BenchConfig:
    """Raises FileNotFoundError for a missing file and ConfigError for bad content."""
    return parse_bench_config(Path(path).read_text(encoding="utf-8"))


async def fetch_provider_rows(session: aiohttp.ClientSession, provider: WSPProvider) -> Dict[int, Dict[str, str]]:
    request = HttpExchange(method="GET", url=f"{provider.base_url}/metrics")
    response = await exchange(session, request, timeout=REQUEST_TIMEOUT_MS / 1000)
    if response.status != 200:
        raise TransportError(f"/metrics returned HTTP {response.status}")
    return {int(row["transaction_id"]): row for row in csv.DictReader(io.StringIO(response.text))}


def _label(timing: TransactionTiming, mode: str, record_count: int) -> None:
    timing.mode = mode
    timing.record_count = record_count
    if mode == PLAIN:
        timing.mark_absent("compress", "decompress")


async def run_cell(
    config: BenchConfig,
    broker_url: str,
    mode: str,
    record_count: int,
    session: aiohttp.ClientSession,
    transaction_ids: Iterator[int],
) -> List[TransactionTiming]:
    provider = WSPProvider(
        ProviderConfig(
            service_name=config.service_name,
            listen_port=0,
            broker_url=broker_url,
            compress_mode=MODE_TO_COMPRESS[mode],
            payload_spec=GeneratorSpec(record_count, config.seed, config.template_id),
            codec_params=config.codec_params,
            host=config.host,
            advertise_host=config.host,
        )
    )
    if not await provider.start():
        logger.error(f"❌ Cell {mode}/{record_count} aborted: provider failed to start")
        failed = TransactionTiming(transaction_id=0, outcome=STARTUP_FAILURE)
        _label(failed, mode, record_count)
        return [failed]

    try:
        consumer = WSConsumer(
            ConsumerConfig(
                broker_url=broker_url,
                service_name=config.service_name,
                iterations=config.iterations,
                codec_params=config.codec_params,
                request_timeout=config.request_timeout,
            ),
            session=session,
            transaction_ids=transaction_ids,
        )
        timings = await consumer.poll_until_done()

        try:
            provider_rows = await fetch_provider_rows(session, provider)
        except TransportError as e:
            logger.warning(f"⚠️ Could not read provider metrics for {mode}/{record_count}: {e}")
            provider_rows = {}

        for timing in timings:
            _label(timing, mode, record_count)
            row = provider_rows.get(timing.transaction_id)
            if row is not None:
                timing.merge_provider(row)
        return timings
    finally:
        await provider.stop()


async def run_experiment(config: BenchConfig) -> List[TransactionTiming]:
    """
    Run every (mode, record_count) cell against a private broker.

    Raises:
        BrokerUnavailableError: The broker itself could not be started.
    """
    broker = BrokerNode(port=0, host=config.host, snapshot_path=None, name="bench-registry")
    if not await broker.start():
        raise BrokerUnavailableError("benchmark broker failed to start")

    rows: List[TransactionTiming] = []
    transaction_ids = itertools.count(1)
    try:
        async with aiohttp.ClientSession() as session:
            for mode, record_count in config.cells():
                logger.info(f"📊 Running cell mode={mode} record_count={record_count}")
                rows.extend(
                    await run_cell(config, broker.base_url, mode, record_count, session, transaction_ids)
                )
    finally:
        await broker.stop()
    return rows
