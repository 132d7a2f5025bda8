"""worksim-client: typed bindings for the worksim wire protocol."""

from .client import (
    Client,
    ConnectError,
    ServerError,
    SessionHandle,
    WorksimClientError,
    connect,
)

__version__ = "0.1.0"

__all__ = [
    "Client",
    "ConnectError",
    "ServerError",
    "SessionHandle",
    "WorksimClientError",
    "connect",
    "__version__",
]
