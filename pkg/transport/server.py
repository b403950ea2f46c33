import asyncio
import logging
from dataclasses import dataclass, field
from typing import Awaitable, Callable, Dict, Mapping, Optional

from aiohttp import web

from config import CLIENT_MAX_SIZE, DEFAULT_OPERATION, SHUTDOWN_TIMEOUT, get_logger
from envelope import build_fault
from errors import PortInUseError

logger = get_logger(__name__)

Handler = Callable[[web.Request], Awaitable[web.StreamResponse]]

SOAP_PATH_PREFIX = "/ws/"


def match_route(routes: Mapping[str, Handler], path: str) -> Optional[Handler]:
    """Longest-prefix match of ``path`` against the route table."""
    best = None
    for prefix in routes:
        if path.startswith(prefix) and (best is None or len(prefix) > len(best)):
            best = prefix
    return routes[best] if best is not None else None


def error_response(request: web.Request, exc: BaseException) -> web.Response:
    """500 response: a SOAP Fault on SOAP paths, plain text elsewhere."""
    if request.path.startswith(SOAP_PATH_PREFIX):
        return web.Response(
            status=500,
            text=build_fault("Server", f"{type(exc).__name__}: {exc}", DEFAULT_OPERATION),
            content_type="text/xml",
            charset="utf-8",
        )
    return web.Response(status=500, text=f"internal error: {exc}\n", charset="utf-8")


class InFlight:
    """Counts requests being handled. Once closing, new requests are turned away."""

    def __init__(self):
        self.count = 0
        self.closing = False
        self._idle = asyncio.Event()
        self._idle.set()

    def enter(self) -> None:
        self.count += 1
        self._idle.clear()

    def leave(self) -> None:
        self.count -= 1
        if self.count == 0:
            self._idle.set()

    async def drain(self, timeout: float) -> bool:
        """Stop admitting requests and wait for the running ones to finish."""
        self.closing = True
        try:
            await asyncio.wait_for(self._idle.wait(), timeout)
            return True
        except asyncio.TimeoutError:
            return False


def inflight_middleware(tracker: InFlight):
    @web.middleware
    async def middleware(request: web.Request, handler):
        if tracker.closing:
            return web.Response(status=503, text="server is shutting down\n", headers={"Connection": "close"})
        tracker.enter()
        try:
            response = await handler(request)
            # finish writing before the request stops counting as in flight
            await response.prepare(request)
            await response.write_eof()
            return response
        finally:
            tracker.leave()

    return middleware


@web.middleware
async def fault_middleware(request: web.Request, handler):
    try:
        return await handler(request)
    except web.HTTPException:
        raise
    except Exception as e:
        logger.exception(f"❌ Handler failed for {request.method} {request.path}: {e}")
        return error_response(request, e)


def web_server(
    routes: Mapping[str, Handler],
    name: str = "cmx",
    tracker: Optional[InFlight] = None,
) -> web.Application:
    """Initialize and configure the aiohttp application for a route table."""
    middlewares = [fault_middleware]
    if tracker is not None:
        middlewares.insert(0, inflight_middleware(tracker))
    server_config = {
        'client_max_size': CLIENT_MAX_SIZE,
        'middlewares': middlewares,
    }

    web_app = web.Application(**server_config)
    table: Dict[str, Handler] = dict(routes)

    async def dispatch(request: web.Request) -> web.StreamResponse:
        handler = match_route(table, request.path)
        if handler is None:
            return web.Response(status=404, text=f"no route for {request.path}\n")
        return await handler(request)

    web_app.router.add_route("*", "/{tail:.*}", dispatch)

    # Add startup and cleanup handlers
    async def on_startup(app):
        logger.info(f"🌐 {name} web server starting up...")

    async def on_cleanup(app):
        logger.info(f"🧹 {name} web server cleaning up...")

    web_app.on_startup.append(on_startup)
    web_app.on_cleanup.append(on_cleanup)

    return web_app


@dataclass
class ServerHandle:
    runner: web.AppRunner
    host: str
    port: int
    name: str = "cmx"
    tracker: InFlight = field(default_factory=InFlight)
    shutdown_timeout: float = SHUTDOWN_TIMEOUT

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    async def shutdown(self) -> None:
        """Let in-flight requests finish, then stop listening and release the port."""
        if not await self.tracker.drain(self.shutdown_timeout):
            logger.warning(
                f"⚠️ {self.name} server shutting down with {self.tracker.count} request(s) still running"
            )
        await self.runner.cleanup()
        logger.info(f"🛑 {self.name} server on port {self.port} stopped")


async def serve(
    routes: Mapping[str, Handler],
    port: int,
    host: str = "127.0.0.1",
    name: str = "cmx",
    shutdown_timeout: float = SHUTDOWN_TIMEOUT,
) -> ServerHandle:
    """Start an HTTP server for ``routes``; port 0 picks a free port."""
    tracker = InFlight()
    runner = web.AppRunner(
        web_server(routes, name, tracker),
        access_log=logging.getLogger("aiohttp.access"),
        shutdown_timeout=shutdown_timeout,
    )
    await runner.setup()
    site = web.TCPSite(runner, host, port)
    try:
        await site.start()
    except OSError as e:
        await runner.cleanup()
        raise PortInUseError(f"cannot listen on {host}:{port}: {e}") from e

    bound_port = port
    for address in runner.addresses:
        if isinstance(address, tuple) and len(address) >= 2:
            bound_port = address[1]
            break

    logger.info(f"🌐 {name} web server started on {host}:{bound_port}")
    return ServerHandle(
        runner=runner,
        host=host,
        port=bound_port,
        name=name,
        tracker=tracker,
        shutdown_timeout=shutdown_timeout,
    )
