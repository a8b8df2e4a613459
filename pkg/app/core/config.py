from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process-level settings. Analysis parameters live in the pipeline config file."""

    model_config = {
        "extra": "ignore",
        "env_prefix": "SKYSIG_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
    }

    app_name: str = "Sky Signature"
    environment: str = "development"
    log_level: str = "INFO"

    # Used when --config is not given on the command line
    default_config_path: str = "pipeline.conf"

    # Sentry Error Monitoring
    sentry_dsn: str = ""


@lru_cache
def get_settings() -> Settings:
    return Settings()
