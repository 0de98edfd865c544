"""HTTP client helper for the service.

With a server URL, talks to a remote instance over httpx; without one, runs
requests against the in-process app so the CLI works standalone.
"""

from __future__ import annotations

import httpx


def make_client(server: str | None = None):
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    from fastapi.testclient import TestClient

    from covexperts.service.app import app

    return TestClient(app)
