"""stdio JSON bridge serving GPT-2 next-token distributions and tokenization."""

from .server import PROTOCOL_VERSION, BridgeServer, main

__version__ = "0.1.0"

__all__ = ["PROTOCOL_VERSION", "BridgeServer", "main"]
