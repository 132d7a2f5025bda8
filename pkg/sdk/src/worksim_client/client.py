"""Thin typed client for the worksim environment server.

No business logic lives here: every method is a 1:1 mapping onto a protocol
endpoint, plus a small callback runner that loops observation -> actions the
way the reference harness does. Schema versions are checked once at connect.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx

SUPPORTED_SCHEMA = "1"


class WorksimClientError(Exception):
    """Base class for everything this client raises."""


class ConnectError(WorksimClientError):
    """The server is unreachable or speaks an unsupported schema."""


class ServerError(WorksimClientError):
    """The server rejected a request (bad ids, lifecycle violations)."""

    def __init__(self, status_code: int, detail: str):
        super().__init__(f"{status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


def _unwrap(response: httpx.Response) -> dict:
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ServerError(response.status_code, str(detail))
    return response.json()


@dataclass
class SessionHandle:
    """One session on the server; one handle per session, handles independent."""

    client: "Client"
    session_id: str
    scenario_id: str
    initial_observation: dict

    def observe(self) -> dict:
        return self.client._get(f"/sessions/{self.session_id}/observation")

    def act(self, tool: str, arguments: dict | None = None, step: int | None = None) -> dict:
        body = {"tool": tool, "arguments": arguments or {}, "step": step}
        return self.client._post(f"/sessions/{self.session_id}/actions", body)

    def hint(self, tier: int, text: str) -> dict:
        return self.client._post(f"/sessions/{self.session_id}/hints", {"tier": tier, "text": text})

    def finalize(self) -> dict:
        return self.client._post(f"/sessions/{self.session_id}/finalize", {})["report"]

    def report(self) -> dict:
        return self.client._get(f"/sessions/{self.session_id}/report")["report"]

    def events(self, since: int = 0) -> dict:
        return self.client._get(f"/sessions/{self.session_id}/events", params={"since": since})

    def run(self, callback, budget: int = 200) -> dict:
        """Loop callback(observation) -> list of {"tool", "arguments"} (or None
        to stop) until the budget runs out, then finalize."""
        observation = self.initial_observation
        for step in range(1, budget + 1):
            calls = callback(observation)
            if calls is None:
                break
            for call in calls:
                outcome = self.act(call["tool"], call.get("arguments", {}), step=step)
                observation = outcome["observation"]
        return self.finalize()


class Client:
    def __init__(self, endpoint: str, http: httpx.Client | None = None):
        self.endpoint = endpoint.rstrip("/")
        self._http = http or httpx.Client(base_url=self.endpoint, timeout=30.0)

    # -- plumbing ---------------------------------------------------------

    def _get(self, path: str, params: dict | None = None) -> dict:
        try:
            return _unwrap(self._http.get(path, params=params))
        except httpx.TransportError as exc:
            raise ConnectError(f"cannot reach {self.endpoint}: {exc}") from exc

    def _post(self, path: str, body: dict) -> dict:
        try:
            return _unwrap(self._http.post(path, json=body))
        except httpx.TransportError as exc:
            raise ConnectError(f"cannot reach {self.endpoint}: {exc}") from exc

    # -- endpoints ---------------------------------------------------------

    def health(self) -> dict:
        return self._get("/health")

    def tools(self) -> list[dict]:
        return self._get("/tools")["tools"]

    def rules(self) -> list[dict]:
        return self._get("/rules")["rules"]

    def build_benchmark(self, seed: int = 0, n: int = 50) -> dict:
        return self._post("/benchmarks", {"seed": seed, "n": n})

    def scenario(self, scenario_id: str) -> dict:
        return self._get(f"/scenarios/{scenario_id}")

    def create(self, scenario_id: str | None = None, benchmark_id: str | None = None,
               index: int | None = None) -> SessionHandle:
        body = {"scenario_id": scenario_id, "benchmark_id": benchmark_id, "index": index}
        created = self._post("/sessions", body)
        return SessionHandle(
            client=self,
            session_id=created["session_id"],
            scenario_id=created["scenario_id"],
            initial_observation=created["observation"],
        )

    def close(self) -> None:
        self._http.close()


def connect(endpoint: str) -> Client:
    """Open a client and verify reachability + schema compatibility."""
    client = Client(endpoint)
    health = client.health()
    version = health.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise ConnectError(f"server speaks schema {version!r}, this client needs {SUPPORTED_SCHEMA!r}")
    return client
