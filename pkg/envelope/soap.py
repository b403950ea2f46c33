"""
SOAP 1.1 envelopes for plain and compressed message payloads.

Response layout::

    <soap:Envelope xmlns:soap="..." xmlns:cmx="urn:cmx:messaging:1">
      <soap:Header>
        <cmx:Compressed>true|false</cmx:Compressed>
        <cmx:Operation>getMessage</cmx:Operation>
        <cmx:TransactionId>..</cmx:TransactionId>        (optional)
      </soap:Header>
      <soap:Body>
        <cmx:Payload contentType=".."> | <cmx:CompressedPayload ..> | <soap:Fault>
      </soap:Body>
    </soap:Envelope>
"""

import re
from dataclasses import dataclass
from typing import Optional, Union

from lxml import etree
from lxml.builder import ElementMaker

from config import CMX_NAMESPACE, DEFAULT_OPERATION, SOAP_ENV_NAMESPACE
from errors import (
    EnvelopeError,
    MissingEnvelopeElementError,
    NotXmlError,
    PayloadNotRepresentableError,
    UnknownBodyElementError,
)
from helper_func import decode_base64, encode_base64

NSMAP = {"soap": SOAP_ENV_NAMESPACE, "cmx": CMX_NAMESPACE}
COMPRESSION_ALGORITHM = "CMX1-LZ77"
BLOCK_ENCODING = "base64"

SOAP = ElementMaker(namespace=SOAP_ENV_NAMESPACE, nsmap=NSMAP)
CMX = ElementMaker(namespace=CMX_NAMESPACE, nsmap=NSMAP)
PLAIN = ElementMaker()

_ENVELOPE = etree.QName(SOAP_ENV_NAMESPACE, "Envelope").text
_HEADER = etree.QName(SOAP_ENV_NAMESPACE, "Header").text
_BODY = etree.QName(SOAP_ENV_NAMESPACE, "Body").text
_FAULT = etree.QName(SOAP_ENV_NAMESPACE, "Fault").text
_PAYLOAD = etree.QName(CMX_NAMESPACE, "Payload").text
_COMPRESSED_PAYLOAD = etree.QName(CMX_NAMESPACE, "CompressedPayload").text
_COMPRESSED = etree.QName(CMX_NAMESPACE, "Compressed").text
_OPERATION = etree.QName(CMX_NAMESPACE, "Operation").text
_TRANSACTION_ID = etree.QName(CMX_NAMESPACE, "TransactionId").text

# XML 1.0 Char production
_XML_ILLEGAL = re.compile(r"[^\u0009\u000A\u000D\u0020-\uD7FF\uE000-\uFFFD\U00010000-\U0010FFFF]")
_NCNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")

_PARSER = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=True)


@dataclass(frozen=True)
class MessagePayload:
    data: bytes
    content_type: str = "text/xml"

    def __post_init__(self):
        if not self.content_type:
            raise EnvelopeError("content_type must not be empty")

    def __len__(self):
        return len(self.data)


@dataclass(frozen=True)
class SoapFault:
    code: str
    reason: str = ""


@dataclass(frozen=True)
class SoapEnvelope:
    compressed: bool = False
    payload: Optional[MessagePayload] = None
    compressed_block: Optional[bytes] = None
    original_size: Optional[int] = None
    operation: str = DEFAULT_OPERATION
    fault: Optional[SoapFault] = None
    transaction_id: Optional[str] = None

    def __post_init__(self):
        present = [x is not None for x in (self.payload, self.compressed_block, self.fault)]
        if sum(present) != 1:
            raise EnvelopeError("exactly one of payload, compressed_block or fault must be set")
        if self.compressed != (self.compressed_block is not None):
            raise EnvelopeError("compressed flag must match presence of compressed_block")
        if (self.original_size is not None) != self.compressed:
            raise EnvelopeError("original_size is required exactly for compressed envelopes")
        if self.original_size is not None and self.original_size < 0:
            raise EnvelopeError("original_size must be non-negative")
        if not _NCNAME.fullmatch(self.operation or ""):
            raise EnvelopeError(f"invalid operation name: {self.operation!r}")

    @property
    def is_fault(self) -> bool:
        return self.fault is not None


@dataclass(frozen=True)
class SoapRequest:
    operation: str
    transaction_id: Optional[str] = None


def payload_text(payload: MessagePayload) -> str:
    """Return the payload as XML character data or raise if it cannot be one."""
    try:
        text = payload.data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise PayloadNotRepresentableError(f"payload is not valid UTF-8: {e}") from e

    bad = _XML_ILLEGAL.search(text)
    if bad:
        raise PayloadNotRepresentableError(
            f"payload contains U+{ord(bad.group()):04X} at offset {bad.start()}, not allowed in XML"
        )
    return text


def _header(compressed: bool, operation: str, transaction_id: Optional[str]):
    children = [
        CMX.Compressed("true" if compressed else "false"),
        CMX.Operation(operation),
    ]
    if transaction_id is not None:
        children.append(CMX.TransactionId(str(transaction_id)))
    return SOAP.Header(*children)


def _serialize(root) -> str:
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8").decode("utf-8")


def render_envelope(envelope: SoapEnvelope) -> str:
    """Serialize a SoapEnvelope to XML text."""
    if envelope.fault is not None:
        content = SOAP.Fault(
            PLAIN.faultcode(f"soap:{envelope.fault.code}"),
            PLAIN.faultstring(envelope.fault.reason),
        )
    elif envelope.compressed:
        content = CMX.CompressedPayload(
            encode_base64(envelope.compressed_block),
            encoding=BLOCK_ENCODING,
            algorithm=COMPRESSION_ALGORITHM,
            originalSize=str(envelope.original_size),
        )
    else:
        content = CMX.Payload(payload_text(envelope.payload), contentType=envelope.payload.content_type)

    root = SOAP.Envelope(
        _header(envelope.compressed, envelope.operation, envelope.transaction_id),
        SOAP.Body(content),
    )
    return _serialize(root)


def build_envelope(
    content: Union[MessagePayload, bytes],
    compressed: bool = False,
    operation: str = DEFAULT_OPERATION,
    *,
    original_size: Optional[int] = None,
    transaction_id: Optional[str] = None,
) -> str:
    """Build the XML text of a plain or compressed response envelope."""
    if compressed:
        if isinstance(content, MessagePayload):
            raise EnvelopeError("compressed envelopes carry a serialized block, not a payload")
        envelope = SoapEnvelope(
            compressed=True,
            compressed_block=bytes(content),
            original_size=original_size,
            operation=operation,
            transaction_id=transaction_id,
        )
    else:
        if not isinstance(content, MessagePayload):
            raise EnvelopeError("plain envelopes carry a MessagePayload")
        envelope = SoapEnvelope(payload=content, operation=operation, transaction_id=transaction_id)
    return render_envelope(envelope)


def build_fault(
    code: str,
    reason: str,
    operation: str = DEFAULT_OPERATION,
    transaction_id: Optional[str] = None,
) -> str:
    return render_envelope(
        SoapEnvelope(fault=SoapFault(code, reason), operation=operation, transaction_id=transaction_id)
    )


def build_request(operation: str = DEFAULT_OPERATION, transaction_id: Optional[str] = None) -> str:
    """Build a request envelope whose Body names the invoked operation."""
    if not _NCNAME.fullmatch(operation or ""):
        raise EnvelopeError(f"invalid operation name: {operation!r}")

    header = []
    if transaction_id is not None:
        header.append(SOAP.Header(CMX.TransactionId(str(transaction_id))))
    root = SOAP.Envelope(*header, SOAP.Body(getattr(CMX, operation)()))
    return _serialize(root)


def _parse_root(xml: Union[str, bytes]):
    raw = xml.encode("utf-8") if isinstance(xml, str) else xml
    try:
        root = etree.fromstring(raw, parser=_PARSER)
    except etree.XMLSyntaxError as e:
        raise NotXmlError(f"not well-formed XML: {e}") from e

    if root.tag != _ENVELOPE:
        raise MissingEnvelopeElementError(f"root element is {root.tag}, expected soap:Envelope")

    headers = root.findall(_HEADER)
    bodies = root.findall(_BODY)
    if len(headers) > 1:
        raise MissingEnvelopeElementError("envelope has more than one Header")
    if len(bodies) != 1:
        raise MissingEnvelopeElementError("envelope must have exactly one Body")

    header = headers[0] if headers else None
    children = [child for child in bodies[0] if isinstance(child.tag, str)]
    if not children:
        raise MissingEnvelopeElementError("Body is empty")
    if len(children) > 1:
        raise UnknownBodyElementError("Body must hold exactly one element")
    return header, children[0]


def _header_text(header, tag: str) -> Optional[str]:
    if header is None:
        return None
    element = header.find(tag)
    if element is None:
        return None
    return (element.text or "").strip()


def _local_code(code: str) -> str:
    return code.split(":", 1)[-1]


def parse_envelope(xml: Union[str, bytes]) -> SoapEnvelope:
    """Parse a response envelope. Faults are returned, not raised."""
    header, content = _parse_root(xml)

    flag = _header_text(header, _COMPRESSED)
    if flag not in (None, "true", "false", "1", "0"):
        raise EnvelopeError(f"cmx:Compressed has invalid value {flag!r}")
    operation = _header_text(header, _OPERATION) or DEFAULT_OPERATION
    transaction_id = _header_text(header, _TRANSACTION_ID)

    if content.tag == _FAULT:
        code = content.findtext("faultcode") or ""
        reason = content.findtext("faultstring") or ""
        return SoapEnvelope(
            fault=SoapFault(_local_code(code.strip()), reason),
            operation=operation,
            transaction_id=transaction_id,
        )

    if content.tag == _PAYLOAD:
        payload = MessagePayload(
            data=(content.text or "").encode("utf-8"),
            content_type=content.get("contentType") or "text/xml",
        )
        return SoapEnvelope(
            compressed=flag in ("true", "1"),
            payload=payload,
            operation=operation,
            transaction_id=transaction_id,
        )

    if content.tag == _COMPRESSED_PAYLOAD:
        encoding = content.get("encoding")
        algorithm = content.get("algorithm")
        if encoding != BLOCK_ENCODING:
            raise EnvelopeError(f"unsupported block encoding {encoding!r}")
        if algorithm != COMPRESSION_ALGORITHM:
            raise EnvelopeError(f"unsupported compression algorithm {algorithm!r}")
        try:
            original_size = int(content.get("originalSize", ""))
        except ValueError as e:
            raise EnvelopeError("originalSize attribute is missing or not an integer") from e

        block = decode_base64((content.text or "").strip())
        return SoapEnvelope(
            compressed=flag in (None, "true", "1"),
            compressed_block=block,
            original_size=original_size,
            operation=operation,
            transaction_id=transaction_id,
        )

    raise UnknownBodyElementError(f"unknown Body element {content.tag}")


def parse_request(xml: Union[str, bytes]) -> SoapRequest:
    header, content = _parse_root(xml)
    qname = etree.QName(content)
    if qname.namespace != CMX_NAMESPACE:
        raise UnknownBodyElementError(f"request Body element {content.tag} is outside the cmx namespace")
    return SoapRequest(operation=qname.localname, transaction_id=_header_text(header, _TRANSACTION_ID))
