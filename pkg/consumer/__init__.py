from .consumer import Consumption, ConsumerConfig, WSConsumer, normalize_content_type

__all__ = ["Consumption", "ConsumerConfig", "WSConsumer", "normalize_content_type"]
