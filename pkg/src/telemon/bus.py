"""Publish/subscribe transport used by the ingest loop and the simulator.

Two implementations of one small connection interface:

* ``InProcessBroker`` — a local broker living in this process. It speaks
  the same topic-filter semantics as MQTT (``+`` and ``#`` wildcards) and
  can be killed and restarted to exercise reconnect behavior. This is the
  transport for tests, demos, and single-process deployments.
* ``MqttConnector`` — a thin adapter over paho-mqtt for real brokers,
  available when the optional ``paho-mqtt`` dependency is installed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from .errors import BrokerUnreachableError

MessageHandler = Callable[[str, bytes], None]


def topic_matches(pattern: str, topic: str) -> bool:
    """MQTT topic filter match: ``+`` one level, ``#`` trailing multi-level."""
    pattern_parts = pattern.split("/")
    topic_parts = topic.split("/")
    for i, p in enumerate(pattern_parts):
        if p == "#":
            return i == len(pattern_parts) - 1
        if i >= len(topic_parts):
            return False
        if p != "+" and p != topic_parts[i]:
            return False
    return len(pattern_parts) == len(topic_parts)


@dataclass
class _Subscription:
    pattern: str
    handler: MessageHandler


class BrokerConnection:
    """One client connection on the in-process broker."""

    def __init__(self, broker: "InProcessBroker", client_id: str):
        self._broker = broker
        self.client_id = client_id
        self.subscriptions: list[_Subscription] = []
        self._disconnect_handlers: list[Callable[[], None]] = []
        self.alive = True

    def subscribe(self, pattern: str, handler: MessageHandler) -> None:
        self.subscriptions.append(_Subscription(pattern, handler))

    def publish(self, topic: str, payload: bytes) -> None:
        if not self.alive:
            raise BrokerUnreachableError("connection lost")
        self._broker._dispatch(topic, payload)

    def on_disconnect(self, handler: Callable[[], None]) -> None:
        self._disconnect_handlers.append(handler)

    def close(self) -> None:
        if self.alive:
            self.alive = False
            self._broker._forget(self)

    def _drop(self) -> None:
        self.alive = False
        for handler in list(self._disconnect_handlers):
            handler()


class InProcessBroker:
    """Local pub/sub broker with MQTT topic-filter semantics.

    ``kill()`` severs every connection and refuses new ones until
    ``restart()``; clients see their disconnect handlers fire, which is
    how reconnect-with-backoff paths are exercised without a network.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._connections: list[BrokerConnection] = []
        self._up = True
        self.delivered = 0

    def connect(self, client_id: str = "client") -> BrokerConnection:
        with self._lock:
            if not self._up:
                raise BrokerUnreachableError("broker is down")
            conn = BrokerConnection(self, client_id)
            self._connections.append(conn)
            return conn

    def kill(self) -> None:
        with self._lock:
            self._up = False
            dropped = list(self._connections)
            self._connections.clear()
        for conn in dropped:
            conn._drop()

    def restart(self) -> None:
        with self._lock:
            self._up = True

    @property
    def up(self) -> bool:
        return self._up

    def _forget(self, conn: BrokerConnection) -> None:
        with self._lock:
            if conn in self._connections:
                self._connections.remove(conn)

    def _dispatch(self, topic: str, payload: bytes) -> None:
        with self._lock:
            targets = [
                sub.handler
                for conn in self._connections
                for sub in conn.subscriptions
                if topic_matches(sub.pattern, topic)
            ]
        for handler in targets:
            handler(topic, payload)
            self.delivered += 1


class MqttConnector:
    """Adapter producing BrokerConnection-shaped handles over paho-mqtt.

    Import of paho is deferred so the rest of the platform works without
    it; connecting raises a clear error when the dependency is missing.
    """

    def __init__(self, host: str, port: int = 1883, username: str | None = None,
                 password: str | None = None, tls: bool = False):
        self.host = host
        self.port = port
        self.username = username
        self.password = password
        self.tls = tls

    def connect(self, client_id: str = "telemon"):
        try:
            import paho.mqtt.client as mqtt
        except ImportError as exc:
            raise BrokerUnreachableError(
                "mqtt:// transport needs the optional paho-mqtt dependency"
                " (pip install telemon[mqtt]); the in-process broker needs none"
            ) from exc

        client = mqtt.Client(client_id=client_id, clean_session=False)
        if self.username:
            client.username_pw_set(self.username, self.password)
        if self.tls:
            client.tls_set()
        return _PahoConnection(client, self.host, self.port)


class _PahoConnection:
    def __init__(self, client, host: str, port: int):
        self._client = client
        self._subscriptions: list[_Subscription] = []
        self._disconnect_handlers: list[Callable[[], None]] = []
        client.on_message = self._on_message
        client.on_disconnect = self._on_disconnect
        try:
            client.connect(host, port)
        except OSError as exc:
            raise BrokerUnreachableError(f"cannot reach {host}:{port}: {exc}") from exc
        client.loop_start()
        self.alive = True

    def subscribe(self, pattern: str, handler: MessageHandler) -> None:
        self._subscriptions.append(_Subscription(pattern, handler))
        self._client.subscribe(pattern, qos=1)

    def publish(self, topic: str, payload: bytes) -> None:
        self._client.publish(topic, payload, qos=1)

    def on_disconnect(self, handler: Callable[[], None]) -> None:
        self._disconnect_handlers.append(handler)

    def close(self) -> None:
        self.alive = False
        self._client.loop_stop()
        self._client.disconnect()

    def _on_message(self, _client, _userdata, message) -> None:
        for sub in self._subscriptions:
            if topic_matches(sub.pattern, message.topic):
                sub.handler(message.topic, message.payload)

    def _on_disconnect(self, _client, _userdata, rc) -> None:
        if rc != 0:
            self.alive = False
            for handler in self._disconnect_handlers:
                handler()


def reconnect_delays(base_s: float = 1.0, cap_s: float = 60.0):
    """Exponential backoff schedule: base, 2*base, ... capped, forever."""
    delay = base_s
    while True:
        yield min(delay, cap_s)
        delay = min(delay * 2, cap_s)
