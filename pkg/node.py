import asyncio
import signal
from datetime import datetime
from typing import Dict, Optional

import pytz
from aiohttp import web

from config import HOST, get_logger
from errors import CmxError
from transport.server import Handler, ServerHandle, serve

logger = get_logger(__name__)

UTC = pytz.utc


class ServiceNode:
    """
    A long-running server role (broker or provider).

    Subclasses supply ``routes()`` and may hook ``on_start``/``on_stop``.
    """

    role = "node"

    def __init__(self, name: str, port: int, host: str = HOST):
        self.name = name
        self.host = host
        self.port = port
        self.logger = logger
        self.uptime: Optional[datetime] = None
        self.server: Optional[ServerHandle] = None
        self._is_running = False
        self._stop_event: Optional[asyncio.Event] = None

    @property
    def is_running(self) -> bool:
        return self._is_running

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def routes(self) -> Dict[str, Handler]:
        raise NotImplementedError

    async def on_start(self) -> None:
        """Called after the web server is listening."""

    async def on_stop(self) -> None:
        """Called after the web server has shut down."""

    async def status_handler(self, request: web.Request) -> web.Response:
        if request.path != "/":
            return web.Response(status=404, text=f"no route for {request.path}\n")
        return web.json_response({
            "service": self.name,
            "role": self.role,
            "uptime": self.get_uptime(),
        })

    async def start_web_server(self) -> ServerHandle:
        routes = {"/": self.status_handler}
        routes.update(self.routes())
        self.server = await serve(routes, self.port, self.host, name=f"{self.role}:{self.name}")
        self.port = self.server.port
        return self.server

    async def start(self) -> bool:
        """Start the node. Returns False if startup failed."""
        self.logger.info(f"🚀 Starting {self.role} {self.name}...")
        try:
            await self.start_web_server()
        except CmxError as e:
            self.logger.error(f"❌ Web server failed to start: {e}")
            return False

        self._is_running = True
        self.uptime = datetime.now(UTC)
        try:
            await self.on_start()
        except CmxError as e:
            self.logger.error(f"❌ {self.role} {self.name} failed to start: {e}")
            await self.stop()
            return False

        self.logger.info(f"🎉 {self.role} {self.name} is ready at {self.base_url}")
        return True

    async def stop(self, *args) -> None:
        """Stop the node gracefully."""
        if not self._is_running:
            return

        self.logger.info(f"🛑 Stopping {self.role} {self.name}...")
        self._is_running = False
        try:
            if self.server is not None:
                await self.server.shutdown()
            await self.on_stop()
            self.logger.info(f"✅ {self.role} {self.name} stopped after {self.get_uptime()}")
        except Exception as e:
            self.logger.error(f"❌ Error during stop: {e}")
        finally:
            if self._stop_event is not None:
                self._stop_event.set()

    def get_uptime(self) -> str:
        """
        Get node uptime as string.

        Returns:
            str: Human readable uptime
        """
        if not self.uptime:
            return "Not started"

        delta = datetime.now(UTC) - self.uptime
        return self.get_readable_time(delta.total_seconds())

    @staticmethod
    def get_readable_time(seconds: float) -> str:
        periods = [
            ('day', 86400),
            ('hour', 3600),
            ('minute', 60),
            ('second', 1)
        ]

        result = []
        for period_name, period_seconds in periods:
            if seconds >= period_seconds:
                period_value, seconds = divmod(seconds, period_seconds)
                if period_value > 0:
                    result.append(f"{int(period_value)} {period_name}{'s' if period_value > 1 else ''}")

        return ", ".join(result) if result else "0 seconds"

    async def serve_forever(self) -> bool:
        """Start, then block until a shutdown signal or ``stop()``."""
        self._stop_event = asyncio.Event()
        if not await self.start():
            return False

        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            try:
                loop.add_signal_handler(sig, self._signal_handler, sig)
            except (NotImplementedError, RuntimeError):
                pass

        await self._stop_event.wait()
        return True

    def _signal_handler(self, signum) -> None:
        self.logger.info(f"🛑 Received signal {signum}, shutting down gracefully...")
        asyncio.ensure_future(self.stop())

    def run(self) -> int:
        """Run until interrupted. Returns a process exit code."""
        try:
            ok = asyncio.run(self.serve_forever())
        except KeyboardInterrupt:
            self.logger.info("🛑 Received KeyboardInterrupt, shutting down...")
            return 0
        except Exception as e:
            self.logger.error(f"🔴 Fatal error during {self.role} execution: {e}")
            return 2

        if not ok:
            self.logger.error(f"❌ {self.role} {self.name} failed to start properly.")
            return 2
        return 0
