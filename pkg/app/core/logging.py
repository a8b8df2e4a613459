import logging
from logging.config import dictConfig


def setup_logging(level: str = "INFO") -> None:
    """
    Console logging for the pipeline stages.

    Logs go to stderr; stdout is reserved for the JSON stage reports. Python
    warnings (numpy overflow, scikit-learn convergence) are routed into the log.
    """
    dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "stage": {
                    "format": "%(asctime)s [%(levelname)s] %(name)s - %(message)s",
                    "datefmt": "%H:%M:%S",
                }
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "formatter": "stage",
                    "stream": "ext://sys.stderr",
                    "level": level,
                }
            },
            "loggers": {
                "skysig": {"level": level},
                "py.warnings": {"level": "WARNING"},
            },
            "root": {"handlers": ["console"], "level": "WARNING"},
        }
    )
    logging.captureWarnings(True)
