from .http import HttpExchange, SOAP_CONTENT_TYPE, exchange, soap_action, soap_post
from .server import ServerHandle, match_route, serve, web_server

__all__ = [
    "HttpExchange",
    "SOAP_CONTENT_TYPE",
    "exchange",
    "soap_action",
    "soap_post",
    "ServerHandle",
    "match_route",
    "serve",
    "web_server",
]
