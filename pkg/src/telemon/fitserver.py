"""Bundled fixture server emulating the fitness cloud's REST dialect.

Lets the whole connector path run offline: an OAuth token endpoint plus
per-datatype datapoint listings, backed by a committed JSON dataset.
Pointing the connector at the real service is a base-URL change plus
mapping-table entries.

Dialect (documented byte-exactly in docs/fixture_server.md):

* ``POST /oauth/token`` with form body. ``grant_type=authorization_code``
  and ``code=<code>`` exchange a configured code; ``grant_type=
  refresh_token`` and ``refresh_token=<token>`` rotate a pair. Responses:
  200 ``{"access_token", "refresh_token", "expires_in"}`` or 400
  ``{"error": "invalid_grant"}``.
* ``GET /data/<remote_type>?start=<ms>&end=<ms>`` returns a JSON array of
  ``{"start_ms", "end_ms", "value"}`` for points with start < end_ms <= end.

Tokens rotate deterministically (``at-<account>-<n>``), so refresh tests
have exact expectations.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse


class FixtureDataset:
    """Committed dataset: auth codes, per-type datapoints."""

    def __init__(self, auth_codes: dict[str, str], datapoints: dict[str, list[dict]]):
        self.auth_codes = auth_codes  # code -> account id
        self.datapoints = datapoints  # remote_type -> [{start_ms, end_ms, value}]

    @classmethod
    def load(cls, path: str | Path) -> "FixtureDataset":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(auth_codes=doc["auth_codes"], datapoints=doc.get("datapoints", {}))


class FitFixtureServer:
    """Threaded HTTP server; start() binds an ephemeral port by default."""

    def __init__(self, dataset: FixtureDataset, port: int = 0, token_ttl_s: int = 3600):
        self.dataset = dataset
        self.token_ttl_s = token_ttl_s
        self._port = port
        self._httpd: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None
        self._lock = threading.Lock()
        # account -> rotation counter; token -> (account, kind)
        self._rotation: dict[str, int] = {}
        self._live_tokens: dict[str, tuple[str, str]] = {}
        self._revoked: set[str] = set()
        self.token_requests = 0
        self.data_requests = 0

    # -- token issuing ------------------------------------------------------

    def _issue(self, account: str) -> dict:
        n = self._rotation.get(account, 0) + 1
        self._rotation[account] = n
        access = f"at-{account}-{n}"
        refresh = f"rt-{account}-{n}"
        self._live_tokens[access] = (account, "access")
        self._live_tokens[refresh] = (account, "refresh")
        return {
            "access_token": access,
            "refresh_token": refresh,
            "expires_in": self.token_ttl_s,
        }

    def exchange_code(self, code: str) -> dict | None:
        with self._lock:
            self.token_requests += 1
            account = self.dataset.auth_codes.get(code)
            if account is None or account in self._revoked:
                return None
            return self._issue(account)

    def refresh(self, refresh_token: str) -> dict | None:
        with self._lock:
            self.token_requests += 1
            entry = self._live_tokens.get(refresh_token)
            if entry is None or entry[1] != "refresh" or entry[0] in self._revoked:
                return None
            return self._issue(entry[0])

    def revoke(self, account: str) -> None:
        """Simulate the user revoking platform access at the source."""
        with self._lock:
            self._revoked.add(account)

    def list_datapoints(self, remote_type: str, start_ms: int, end_ms: int) -> list[dict]:
        with self._lock:
            self.data_requests += 1
            points = self.dataset.datapoints.get(remote_type, [])
            return [p for p in points if start_ms < p["end_ms"] <= end_ms]

    def add_datapoint(self, remote_type: str, start_ms: int, end_ms: int, value: float) -> None:
        with self._lock:
            self.dataset.datapoints.setdefault(remote_type, []).append(
                {"start_ms": start_ms, "end_ms": end_ms, "value": value}
            )

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> "FitFixtureServer":
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet under test
                pass

            def _send(self, status: int, body) -> None:
                blob = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(blob)))
                self.end_headers()
                self.wfile.write(blob)

            def do_POST(self) -> None:
                if urlparse(self.path).path != "/oauth/token":
                    self._send(404, {"error": "not_found"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                form = parse_qs(self.rfile.read(length).decode("utf-8"))
                grant = form.get("grant_type", [""])[0]
                if grant == "authorization_code":
                    tokens = server.exchange_code(form.get("code", [""])[0])
                elif grant == "refresh_token":
                    tokens = server.refresh(form.get("refresh_token", [""])[0])
                else:
                    self._send(400, {"error": "unsupported_grant_type"})
                    return
                if tokens is None:
                    self._send(400, {"error": "invalid_grant"})
                else:
                    self._send(200, tokens)

            def do_GET(self) -> None:
                parsed = urlparse(self.path)
                parts = parsed.path.strip("/").split("/")
                if len(parts) != 2 or parts[0] != "data":
                    self._send(404, {"error": "not_found"})
                    return
                query = parse_qs(parsed.query)
                try:
                    start = int(query.get("start", ["0"])[0])
                    end = int(query.get("end", ["0"])[0])
                except ValueError:
                    self._send(400, {"error": "bad_window"})
                    return
                self._send(200, server.list_datapoints(parts[1], start, end))

        self._httpd = ThreadingHTTPServer(("127.0.0.1", self._port), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    @property
    def base_url(self) -> str:
        assert self._httpd is not None, "server not started"
        return f"http://127.0.0.1:{self._httpd.server_address[1]}"

    def stop(self) -> None:
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None
