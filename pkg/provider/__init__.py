from .controller import (
    Controller,
    Dispatch,
    compress_msg_handler,
    normal_msg_handler,
    should_compress,
)
from .generator import TEMPLATES, GeneratorSpec, generate_message
from .service import TimingLog, WSPProvider, publish_service
from .settings import CompressMode, ProviderConfig

__all__ = [
    "Controller",
    "Dispatch",
    "compress_msg_handler",
    "normal_msg_handler",
    "should_compress",
    "TEMPLATES",
    "GeneratorSpec",
    "generate_message",
    "TimingLog",
    "WSPProvider",
    "publish_service",
    "CompressMode",
    "ProviderConfig",
]
