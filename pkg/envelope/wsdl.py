import re
from dataclasses import dataclass, field
from typing import List

from lxml import etree
from lxml.builder import ElementMaker
from yarl import URL

from config import CMX_NAMESPACE, DEFAULT_OPERATION
from errors import WsdlError

NS_WSDL = "http://schemas.xmlsoap.org/wsdl/"
NS_WSDL_SOAP = "http://schemas.xmlsoap.org/wsdl/soap/"
NS_XSD = "http://www.w3.org/2001/XMLSchema"
SOAP_HTTP_TRANSPORT = "http://schemas.xmlsoap.org/soap/http"

_NCNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")


@dataclass(frozen=True)
class ServiceDescriptor:
    service_name: str
    endpoint_url: str
    operations: List[str] = field(default_factory=lambda: [DEFAULT_OPERATION])

    def __post_init__(self):
        if not self.service_name or not _NCNAME.fullmatch(self.service_name):
            raise WsdlError(f"invalid service name: {self.service_name!r}")
        try:
            url = URL(self.endpoint_url)
        except (TypeError, ValueError) as e:
            raise WsdlError(f"invalid endpoint URL {self.endpoint_url!r}: {e}") from e
        if not url.is_absolute() or url.scheme not in ("http", "https"):
            raise WsdlError(f"endpoint URL must be an absolute http(s) URL: {self.endpoint_url!r}")
        if not self.operations:
            raise WsdlError("a service needs at least one operation")
        if len(set(self.operations)) != len(self.operations):
            raise WsdlError("operation names must be unique")
        for name in self.operations:
            if not _NCNAME.fullmatch(name or ""):
                raise WsdlError(f"invalid operation name: {name!r}")

    @property
    def target_namespace(self) -> str:
        return f"urn:cmx:{self.service_name}"

    def soap_action(self, operation: str) -> str:
        return f"urn:cmx:{self.service_name}#{operation}"


def generate_wsdl(desc: ServiceDescriptor) -> str:
    """Render a WSDL 1.1 document for a provider service."""
    tns = desc.target_namespace
    nsmap = {
        "wsdl": NS_WSDL,
        "soap": NS_WSDL_SOAP,
        "xsd": NS_XSD,
        "cmx": CMX_NAMESPACE,
        "tns": tns,
    }
    W = ElementMaker(namespace=NS_WSDL, nsmap=nsmap)
    S = ElementMaker(namespace=NS_WSDL_SOAP, nsmap=nsmap)
    X = ElementMaker(namespace=NS_XSD, nsmap=nsmap)

    schema = X.schema(
        X.element(name="Compressed", type="xsd:boolean"),
        X.element(name="Operation", type="xsd:string"),
        X.element(name="TransactionId", type="xsd:string"),
        X.element(
            X.complexType(
                X.simpleContent(
                    X.extension(
                        X.attribute(name="contentType", type="xsd:string"),
                        base="xsd:string",
                    )
                )
            ),
            name="Payload",
        ),
        X.element(
            X.complexType(
                X.simpleContent(
                    X.extension(
                        X.attribute(name="encoding", type="xsd:string"),
                        X.attribute(name="algorithm", type="xsd:string"),
                        X.attribute(name="originalSize", type="xsd:unsignedLong"),
                        base="xsd:base64Binary",
                    )
                )
            ),
            name="CompressedPayload",
        ),
        *[X.element(X.complexType(), name=op) for op in desc.operations],
        targetNamespace=CMX_NAMESPACE,
        elementFormDefault="qualified",
    )

    messages = []
    port_ops = []
    binding_ops = []
    for op in desc.operations:
        messages.append(W.message(W.part(name="parameters", element=f"cmx:{op}"), name=f"{op}Request"))
        messages.append(
            W.message(
                W.part(name="payload", element="cmx:Payload"),
                W.part(name="compressedPayload", element="cmx:CompressedPayload"),
                name=f"{op}Response",
            )
        )
        port_ops.append(
            W.operation(
                W.input(message=f"tns:{op}Request"),
                W.output(message=f"tns:{op}Response"),
                name=op,
            )
        )
        binding_ops.append(
            W.operation(
                S.operation(soapAction=desc.soap_action(op)),
                W.input(S.body(use="literal")),
                W.output(S.body(use="literal")),
                name=op,
            )
        )

    root = W.definitions(
        W.types(schema),
        W.message(W.part(name="compressed", element="cmx:Compressed"), name="CompressionHeader"),
        *messages,
        W.portType(*port_ops, name=f"{desc.service_name}PortType"),
        W.binding(
            S.binding(style="document", transport=SOAP_HTTP_TRANSPORT),
            *binding_ops,
            name=f"{desc.service_name}Binding",
            type=f"tns:{desc.service_name}PortType",
        ),
        W.service(
            W.port(
                S.address(location=desc.endpoint_url),
                name=f"{desc.service_name}Port",
                binding=f"tns:{desc.service_name}Binding",
            ),
            name=desc.service_name,
        ),
        name=desc.service_name,
        targetNamespace=tns,
    )
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True).decode("utf-8")
