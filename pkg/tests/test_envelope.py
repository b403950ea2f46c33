import random
import re

import pytest
from lxml import etree

from codec import compress, serialize_tokens
from config import CMX_NAMESPACE, SOAP_ENV_NAMESPACE
from envelope import (
    MessagePayload,
    SoapEnvelope,
    SoapFault,
    build_envelope,
    build_fault,
    build_request,
    parse_envelope,
    parse_request,
    payload_text,
    render_envelope,
)
from errors import (
    Base64DecodeError,
    EnvelopeError,
    InvalidBase64CharacterError,
    MissingEnvelopeElementError,
    NotXmlError,
    PayloadNotRepresentableError,
    UnknownBodyElementError,
)

RECORDS = b"<records><record id=\"1\"><status>shipped &amp; paid</status></record></records>"


def compressed_envelope(data: bytes, **kwargs) -> str:
    block = serialize_tokens(compress(data))
    return build_envelope(block, compressed=True, original_size=len(data), **kwargs)


def test_plain_round_trip():
    env = parse_envelope(build_envelope(MessagePayload(b"hi")))
    assert not env.compressed
    assert env.payload.data == b"hi"
    assert env.payload.content_type == "text/xml"


def test_plain_payload_is_escaped_text():
    text = build_envelope(MessagePayload(RECORDS))
    assert "&lt;records&gt;" in text
    assert parse_envelope(text).payload.data == RECORDS


def test_plain_envelope_layout():
    text = build_envelope(MessagePayload(b"hi", "text/plain"), transaction_id="7")
    assert text.startswith("<?xml version='1.0' encoding='UTF-8'?>")
    root = etree.fromstring(text.encode("utf-8"))
    ns = {"soap": SOAP_ENV_NAMESPACE, "cmx": CMX_NAMESPACE}
    assert root.findtext("soap:Header/cmx:Compressed", namespaces=ns) == "false"
    assert root.findtext("soap:Header/cmx:Operation", namespaces=ns) == "getMessage"
    assert root.findtext("soap:Header/cmx:TransactionId", namespaces=ns) == "7"
    payload = root.find("soap:Body/cmx:Payload", namespaces=ns)
    assert payload.get("contentType") == "text/plain"


def test_compressed_round_trip():
    data = b"A" * 1024
    env = parse_envelope(compressed_envelope(data, transaction_id="3"))
    assert env.compressed
    assert env.original_size == 1024
    assert env.transaction_id == "3"
    assert env.compressed_block == serialize_tokens(compress(data))


def test_compressed_envelope_attributes():
    text = compressed_envelope(b"hello hello hello")
    assert 'encoding="base64"' in text
    assert 'algorithm="CMX1-LZ77"' in text
    assert 'originalSize="17"' in text
    ns = {"soap": SOAP_ENV_NAMESPACE, "cmx": CMX_NAMESPACE}
    root = etree.fromstring(text.encode("utf-8"))
    assert root.findtext("soap:Header/cmx:Compressed", namespaces=ns) == "true"


def test_compressed_requires_original_size():
    with pytest.raises(EnvelopeError):
        build_envelope(b"CMX1" + b"\x00" * 8, compressed=True)


def test_envelope_invariants():
    with pytest.raises(EnvelopeError):
        SoapEnvelope()
    with pytest.raises(EnvelopeError):
        SoapEnvelope(payload=MessagePayload(b"x"), fault=SoapFault("Server"))
    with pytest.raises(EnvelopeError):
        SoapEnvelope(compressed=True, payload=MessagePayload(b"x"))
    with pytest.raises(EnvelopeError):
        SoapEnvelope(payload=MessagePayload(b"x"), operation="not an op")


def test_fault_round_trip():
    text = build_fault("Server", "generator exploded", transaction_id="9")
    assert "<faultcode>soap:Server</faultcode>" in text
    env = parse_envelope(text)
    assert env.is_fault
    assert env.fault == SoapFault("Server", "generator exploded")
    assert env.transaction_id == "9"


def test_render_matches_build():
    env = SoapEnvelope(payload=MessagePayload(b"x"), transaction_id="1")
    assert render_envelope(env) == build_envelope(MessagePayload(b"x"), transaction_id="1")


TEXT_ALPHABET = "ab <>&\"'\r\n\t  éß€中\U0001F600]]>"
CONTENT_TYPES = ["text/xml", "application/xml", "text/plain; charset=utf-8"]
FAULT_CODES = ["Server", "Client", "VersionMismatch", "MustUnderstand"]


def random_text(rng: random.Random, size: int) -> str:
    return "".join(rng.choice(TEXT_ALPHABET) for _ in range(size))


def random_envelope(rng: random.Random) -> SoapEnvelope:
    common = {
        "operation": rng.choice(["getMessage", "getStatus", "op_1", "x.y-z"]),
        "transaction_id": rng.choice([None, str(rng.randrange(10**9))]),
    }
    kind = rng.randrange(3)
    if kind == 0:
        text = random_text(rng, rng.randint(0, 200))
        payload = MessagePayload(text.encode("utf-8"), rng.choice(CONTENT_TYPES))
        return SoapEnvelope(payload=payload, **common)
    if kind == 1:
        block = rng.randbytes(rng.randint(0, 300))
        return SoapEnvelope(compressed=True, compressed_block=block, original_size=rng.randrange(1 << 40), **common)
    fault = SoapFault(rng.choice(FAULT_CODES), random_text(rng, rng.randint(0, 60)))
    return SoapEnvelope(fault=fault, **common)


def test_parse_inverts_render_over_random_envelopes():
    rng = random.Random(2024)
    for i in range(1000):
        env = random_envelope(rng)
        assert parse_envelope(render_envelope(env)) == env, f"case {i}: {env!r}"


def test_payload_whitespace_and_carriage_returns_survive():
    data = "  \r\n<a>\r</a>\t café \r".encode("utf-8")
    assert parse_envelope(build_envelope(MessagePayload(data))).payload.data == data


@pytest.mark.parametrize("raw", ["", "not xml", "<a><b></a>"])
def test_not_xml(raw):
    with pytest.raises(NotXmlError):
        parse_envelope(raw)


def test_wrong_root():
    with pytest.raises(MissingEnvelopeElementError):
        parse_envelope("<Envelope/>")


def test_missing_body():
    raw = f'<soap:Envelope xmlns:soap="{SOAP_ENV_NAMESPACE}"><soap:Header/></soap:Envelope>'
    with pytest.raises(MissingEnvelopeElementError):
        parse_envelope(raw)


def test_empty_body():
    raw = f'<soap:Envelope xmlns:soap="{SOAP_ENV_NAMESPACE}"><soap:Body/></soap:Envelope>'
    with pytest.raises(MissingEnvelopeElementError):
        parse_envelope(raw)


def test_unknown_body_element():
    raw = (
        f'<soap:Envelope xmlns:soap="{SOAP_ENV_NAMESPACE}" xmlns:cmx="{CMX_NAMESPACE}">'
        "<soap:Body><cmx:Mystery/></soap:Body></soap:Envelope>"
    )
    with pytest.raises(UnknownBodyElementError):
        parse_envelope(raw)


def test_bad_base64_block():
    text = compressed_envelope(b"abcabcabc")
    tampered = re.sub(r"(<cmx:CompressedPayload[^>]*>)[^<]+", r"\1!!!!", text)
    with pytest.raises(InvalidBase64CharacterError):
        parse_envelope(tampered)
    with pytest.raises(Base64DecodeError):
        parse_envelope(re.sub(r"(<cmx:CompressedPayload[^>]*>)[^<]+", r"\1QUJD=", text))


def test_bad_original_size():
    text = compressed_envelope(b"abcabcabc").replace('originalSize="9"', 'originalSize="nine"')
    with pytest.raises(EnvelopeError):
        parse_envelope(text)


def test_unsupported_algorithm():
    text = compressed_envelope(b"abcabcabc").replace("CMX1-LZ77", "gzip")
    with pytest.raises(EnvelopeError):
        parse_envelope(text)


def test_payload_text_rejects_invalid_utf8():
    with pytest.raises(PayloadNotRepresentableError):
        payload_text(MessagePayload(b"\xff\xfe"))


def test_payload_text_rejects_xml_illegal_characters():
    with pytest.raises(PayloadNotRepresentableError):
        payload_text(MessagePayload(b"bell\x07"))
    with pytest.raises(PayloadNotRepresentableError):
        build_envelope(MessagePayload(b"nul\x00"))


def test_request_round_trip():
    req = parse_request(build_request("getMessage", "42"))
    assert req.operation == "getMessage"
    assert req.transaction_id == "42"


def test_request_without_transaction_id():
    text = build_request()
    assert "TransactionId" not in text
    assert parse_request(text).transaction_id is None


def test_request_rejects_foreign_body():
    raw = f'<soap:Envelope xmlns:soap="{SOAP_ENV_NAMESPACE}"><soap:Body><getMessage/></soap:Body></soap:Envelope>'
    with pytest.raises(UnknownBodyElementError):
        parse_request(raw)
