from typing import Dict, Optional

from broker.routes import registry_routes
from config import BROKER_PORT, HOST, REGISTRY_SNAPSHOT
from database import RegistryDatabase
from node import ServiceNode
from transport.server import Handler


class BrokerNode(ServiceNode):
    """The service broker: a registry behind the broker HTTP API."""

    role = "broker"

    def __init__(
        self,
        port: int = BROKER_PORT,
        host: str = HOST,
        snapshot_path: Optional[str] = REGISTRY_SNAPSHOT or None,
        name: str = "registry",
    ):
        super().__init__(name, port, host)
        self.db = RegistryDatabase(snapshot_path)

    def routes(self) -> Dict[str, Handler]:
        return registry_routes(self.db)

    async def start(self) -> bool:
        # restore before accepting requests
        self.db.load_snapshot()
        return await super().start()

    async def on_start(self) -> None:
        self.logger.info(f"✅ Broker holds {await self.db.count()} services")

    async def on_stop(self) -> None:
        self.db.save_snapshot()
