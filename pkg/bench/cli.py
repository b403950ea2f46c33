"""
Command-line entry points for every role.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from bench.harness import load_bench_config, run_experiment
from bench.report import report, rows_to_csv
from bench.timing import TransactionTiming
from broker.node import BrokerNode
from config import (
    BROKER_PORT,
    CMX_LOG,
    COMPRESS_THRESHOLD,
    HOST,
    PROVIDER_PORT,
    REGISTRY_SNAPSHOT,
    get_logger,
    setup_logging,
)
from consumer import ConsumerConfig, WSConsumer
from errors import CmxError, ConfigError, EmptyReportError, UsageError
from provider import CompressMode, GeneratorSpec, ProviderConfig, WSPProvider

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

DEFAULT_BROKER_URL = f"http://{HOST}:{BROKER_PORT}"


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad usage."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> CliParser:
    parser = CliParser(prog="cmx", description="Compressed SOAP message exchange")
    sub = parser.add_subparsers(dest="command", metavar="{broker,provider,consumer,bench}", parser_class=CliParser)
    sub.required = True

    broker = sub.add_parser("broker", help="Run the service broker")
    broker.add_argument("--port", type=int, default=BROKER_PORT)
    broker.add_argument("--host", default=HOST)
    broker.add_argument("--snapshot", default=REGISTRY_SNAPSHOT or None, help="JSON-lines registry snapshot file")

    provider = sub.add_parser("provider", help="Run a provider web service")
    provider.add_argument("--broker", default=DEFAULT_BROKER_URL, help="Broker base URL")
    provider.add_argument("--port", type=int, default=PROVIDER_PORT)
    provider.add_argument("--host", default=HOST)
    provider.add_argument("--service", default="MsgService")
    provider.add_argument("--mode", choices=[m.value for m in CompressMode], default=CompressMode.AUTO.value)
    provider.add_argument("--threshold", type=int, default=COMPRESS_THRESHOLD)
    provider.add_argument("--records", type=int, default=100)
    provider.add_argument("--seed", type=int, default=42)
    provider.add_argument("--template", default="order")

    consumer = sub.add_parser("consumer", help="Run consumer transactions against a service")
    consumer.add_argument("--broker", default=DEFAULT_BROKER_URL, help="Broker base URL")
    consumer.add_argument("--service", default="MsgService")
    consumer.add_argument("--iterations", type=int, default=1)
    consumer.add_argument("--out", default=None, help="Timing CSV output path")
    consumer.add_argument("--timeout-ms", type=int, default=None)

    bench = sub.add_parser("bench", help="Run the plain vs compressed benchmark")
    bench.add_argument("--config", required=True, help="key=value benchmark config file")
    bench.add_argument("--out", default=None, help="Override the config's output path")

    return parser


def run_broker(args) -> int:
    return BrokerNode(port=args.port, host=args.host, snapshot_path=args.snapshot).run()


def run_provider(args) -> int:
    config = ProviderConfig(
        service_name=args.service,
        listen_port=args.port,
        broker_url=args.broker,
        compress_mode=CompressMode(args.mode),
        compress_threshold=args.threshold,
        payload_spec=GeneratorSpec(args.records, args.seed, args.template),
        host=args.host,
    )
    return WSPProvider(config).run()


async def _consume(config: ConsumerConfig) -> List[TransactionTiming]:
    async with WSConsumer(config) as consumer:
        return await consumer.poll_until_done()


def run_consumer(args) -> int:
    kwargs = {"broker_url": args.broker, "service_name": args.service, "iterations": args.iterations}
    if args.timeout_ms is not None:
        kwargs["request_timeout"] = args.timeout_ms
    rows = asyncio.run(_consume(ConsumerConfig(**kwargs)))

    if args.out:
        Path(args.out).write_text(rows_to_csv(rows), encoding="utf-8")
        logger.info(f"✅ Wrote {len(rows)} rows to {args.out}")
    print(report(rows), end="")
    return EXIT_OK if any(r.ok for r in rows) else EXIT_FAILURE


def run_bench(args) -> int:
    config = load_bench_config(args.config)
    if args.out:
        config.output = args.out
    rows = asyncio.run(run_experiment(config))
    print(report(rows, config.output), end="")
    logger.info(f"✅ Wrote {len(rows)} rows to {config.output}")
    return EXIT_OK


COMMANDS = {
    "broker": run_broker,
    "provider": run_provider,
    "consumer": run_consumer,
    "bench": run_bench,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging(CMX_LOG)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as e:
        print(f"cmx: file not found: {e.filename}", file=sys.stderr)
        return EXIT_FAILURE
    except (ConfigError, EmptyReportError) as e:
        print(f"cmx: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (CmxError, OSError) as e:
        logger.error(f"🔴 {args.command} failed: {e}")
        return EXIT_FAILURE
