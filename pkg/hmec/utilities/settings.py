import os
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError


class Settings(BaseModel):
    """Runtime configuration, read from the environment (and a .env file)."""
    model_config = ConfigDict(frozen=True)

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Log level for CLI and worker"
    )
    workers: int = Field(default=1, ge=1, description="Local process-pool width for scans")
    chunk_size: int = Field(default=262_144, ge=1, description="Grid points per scan chunk")
    task_queue: str = Field(default="hmec-analysis-queue", description="Temporal task queue")
    temporal_address: str = Field(default="localhost:7233", description="Temporal frontend address")
    temporal_namespace: str = Field(default="default", description="Temporal namespace")
    temporal_api_key: Optional[str] = Field(default=None, description="Temporal Cloud API key")


def get_settings() -> Settings:
    load_dotenv()

    raw = {
        "log_level": os.getenv("HMEC_LOG_LEVEL", "INFO").upper(),
        "workers": os.getenv("HMEC_WORKERS", str(os.cpu_count() or 1)),
        "chunk_size": os.getenv("HMEC_CHUNK_SIZE", "262144"),
        "task_queue": os.getenv("HMEC_TASK_QUEUE", os.getenv("TEMPORAL_TASK_QUEUE", "hmec-analysis-queue")),
        "temporal_address": os.getenv("TEMPORAL_ADDRESS", "localhost:7233"),
        "temporal_namespace": os.getenv("TEMPORAL_NAMESPACE", "default"),
        "temporal_api_key": os.getenv("TEMPORAL_API_KEY") or None,
    }
    try:
        return Settings(**raw)
    except ValidationError as e:
        fields = ", ".join(str(err["loc"][0]) for err in e.errors())
        raise ValueError(f"Invalid HMEC environment configuration ({fields}): {e}") from e
