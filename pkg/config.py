import os
import logging
from logging.handlers import RotatingFileHandler
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

# Logging Configuration
CMX_LOG = os.environ.get("CMX_LOG", "info").lower()
LOG_FILE = os.environ.get("CMX_LOG_FILE", "")

# Server Configuration
HOST = os.environ.get("CMX_HOST", "127.0.0.1")
ADVERTISE_HOST = os.environ.get("CMX_ADVERTISE_HOST", HOST)
BROKER_PORT = int(os.environ.get("CMX_BROKER_PORT", 8080))
PROVIDER_PORT = int(os.environ.get("CMX_PROVIDER_PORT", 8081))
CLIENT_MAX_SIZE = int(os.environ.get("CMX_CLIENT_MAX_SIZE", 50 * 1024 * 1024))  # 50MB
SHUTDOWN_TIMEOUT = float(os.environ.get("CMX_SHUTDOWN_TIMEOUT", 10))

# Broker Configuration
REGISTRY_SNAPSHOT = os.environ.get("CMX_REGISTRY_SNAPSHOT", "")

# Messaging Configuration
REQUEST_TIMEOUT_MS = int(os.environ.get("CMX_REQUEST_TIMEOUT_MS", 5000))
COMPRESS_THRESHOLD = int(os.environ.get("CMX_COMPRESS_THRESHOLD", 512))

# Namespaces and wire constants
CMX_NAMESPACE = "urn:cmx:messaging:1"
SOAP_ENV_NAMESPACE = "http://schemas.xmlsoap.org/soap/envelope/"
DEFAULT_OPERATION = "getMessage"

LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

LOG_FORMAT = "[%(asctime)s - %(levelname)s] - %(name)s - %(message)s"
LOG_DATEFMT = '%d-%b-%y %H:%M:%S'


def resolve_log_level(name: Optional[str]) -> int:
    """Map a CMX_LOG value to a logging level; unknown names fall back to INFO."""
    return LOG_LEVELS.get((name or "info").lower(), logging.INFO)


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Configure root logging once for a CLI process."""
    handlers = [logging.StreamHandler()]
    log_file = LOG_FILE if log_file is None else log_file
    if log_file:
        handlers.append(
            RotatingFileHandler(
                log_file,
                maxBytes=5_000_000,  # 5MB
                backupCount=3
            )
        )

    logging.basicConfig(
        level=resolve_log_level(level or CMX_LOG),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
        handlers=handlers,
        force=True,
    )

    # Reduce noise from other libraries
    logging.getLogger("aiohttp").setLevel(logging.WARNING)
    logging.getLogger("aiohttp.access").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
