from helper_func import decode_base64, encode_base64

from .soap import (
    MessagePayload,
    SoapEnvelope,
    SoapFault,
    SoapRequest,
    build_envelope,
    build_fault,
    build_request,
    parse_envelope,
    parse_request,
    payload_text,
    render_envelope,
)
from .wsdl import ServiceDescriptor, generate_wsdl

__all__ = [
    "encode_base64",
    "decode_base64",
    "MessagePayload",
    "SoapEnvelope",
    "SoapFault",
    "SoapRequest",
    "build_envelope",
    "build_fault",
    "build_request",
    "parse_envelope",
    "parse_request",
    "payload_text",
    "render_envelope",
    "ServiceDescriptor",
    "generate_wsdl",
]
