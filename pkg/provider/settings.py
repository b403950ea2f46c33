from dataclasses import dataclass, field
from enum import Enum

from codec import CodecParams
from config import ADVERTISE_HOST, BROKER_PORT, COMPRESS_THRESHOLD, HOST, PROVIDER_PORT
from errors import ConfigError
from provider.generator import GeneratorSpec


class CompressMode(str, Enum):
    ALWAYS = "always"
    NEVER = "never"
    AUTO = "auto"


@dataclass
class ProviderConfig:
    service_name: str = "MsgService"
    listen_port: int = PROVIDER_PORT
    broker_url: str = f"http://{HOST}:{BROKER_PORT}"
    compress_mode: CompressMode = CompressMode.AUTO
    compress_threshold: int = COMPRESS_THRESHOLD
    payload_spec: GeneratorSpec = field(default_factory=GeneratorSpec)
    codec_params: CodecParams = field(default_factory=CodecParams)
    host: str = HOST
    advertise_host: str = ADVERTISE_HOST
    publish_attempts: int = 3
    publish_backoff_ms: int = 200

    def __post_init__(self):
        errors = []

        try:
            self.compress_mode = CompressMode(self.compress_mode)
        except ValueError:
            errors.append(f"compress_mode must be always, never or auto, got {self.compress_mode!r}")
        if not self.service_name or "/" in self.service_name:
            errors.append("service_name must be a non-empty path segment")
        # 0 asks the OS for an ephemeral port
        if not 0 <= self.listen_port <= 65535:
            errors.append(f"listen_port must be in 0..65535, got {self.listen_port}")
        if self.compress_threshold < 0:
            errors.append(f"compress_threshold must be >= 0, got {self.compress_threshold}")
        if self.publish_attempts < 1:
            errors.append("publish_attempts must be >= 1")

        if errors:
            raise ConfigError("; ".join(errors))

    def endpoint_path(self) -> str:
        return f"/ws/{self.service_name}"
