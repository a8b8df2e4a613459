#!/usr/bin/env python
"""
Pipeline entrypoint.

- Loads environment (.env)
- Initialises Sentry when SKYSIG_SENTRY_DSN is set
- Dispatches to the command-line front end

Run with: python run_pipeline.py --config pipeline.conf <command>
"""

import sys

from dotenv import load_dotenv

load_dotenv(override=True)

import sentry_sdk  # noqa: E402

from app.cli import main  # noqa: E402
from app.core.config import get_settings  # noqa: E402

_settings = get_settings()
if _settings.sentry_dsn:
    sentry_sdk.init(
        dsn=_settings.sentry_dsn,
        send_default_pii=False,
        environment=_settings.environment,
    )


if __name__ == "__main__":
    sys.exit(main())
