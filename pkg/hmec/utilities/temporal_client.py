"""
Temporal client connection for the distributed analysis backend.

Connects either to a local Temporal server (default) or to Temporal Cloud
with API key authentication, depending on whether an API key is configured.
"""

import logging
from typing import Optional

from temporalio.client import Client

from .settings import Settings, get_settings

logger = logging.getLogger(__name__)


async def get_temporal_client(settings: Optional[Settings] = None) -> Client:
    """
    Create and return a Temporal client connection.

    Args:
        settings: Runtime settings; read from the environment when omitted.

    Environment Variables (via settings):
        TEMPORAL_ADDRESS: localhost:7233 locally, <ns>.<account>.tmprl.cloud:7233 for cloud
        TEMPORAL_NAMESPACE: namespace, "default" locally
        TEMPORAL_API_KEY: when set, connect with TLS and bearer authentication
    """
    settings = settings or get_settings()
    address = settings.temporal_address
    namespace = settings.temporal_namespace

    if settings.temporal_api_key:
        logger.info("Connecting to Temporal Cloud at %s (namespace: %s)", address, namespace)
        client = await Client.connect(
            address,
            namespace=namespace,
            tls=True,
            rpc_metadata={
                "temporal-namespace": namespace,
                "authorization": f"Bearer {settings.temporal_api_key}",
            },
        )
    else:
        logger.info("Connecting to local Temporal at %s (namespace: %s)", address, namespace)
        client = await Client.connect(address, namespace=namespace)

    logger.info("Connected to Temporal")
    return client
