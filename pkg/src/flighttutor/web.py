"""HTTP listener for the browser cockpit: static assets plus a
WebSocket endpoint at /ws that carries the session line protocol
(one protocol line per text frame).

The WebSocket layer is the minimal server-side subset of RFC 6455:
handshake, unfragmented text frames, close, and ping/pong. That keeps
the package dependency-free; browsers cannot open raw TCP sockets, so
this is their way onto the same protocol the TCP server speaks.
"""

from __future__ import annotations

import base64
import hashlib
import socket
import struct
import threading
from pathlib import Path

from .session import SessionConfig, serve_connection

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}

_PLACEHOLDER_PAGE = b"""<!doctype html>
<html><head><title>flighttutor</title></head>
<body><h1>flighttutor session server</h1>
<p>No cockpit UI assets are configured. Build the frontend and point
session.static_dir at its dist/ directory, then reload.</p>
<p>The WebSocket session endpoint is at <code>/ws</code>.</p>
</body></html>
"""


def ws_accept_key(key: str) -> str:
    digest = hashlib.sha1((key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


class WsLineTransport:
    """One protocol line per WebSocket text frame."""

    def __init__(self, conn: socket.socket):
        self._conn = conn
        self._lock = threading.Lock()  # writer + control-frame replies

    # -- frame plumbing ----------------------------------------------------

    def _read_exact(self, n: int) -> bytes | None:
        buf = b""
        while len(buf) < n:
            try:
                chunk = self._conn.recv(n - len(buf))
            except OSError:
                return None
            if not chunk:
                return None
            buf += chunk
        return buf

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        header = bytes([0x80 | opcode])
        length = len(payload)
        if length < 126:
            header += bytes([length])
        elif length < 1 << 16:
            header += bytes([126]) + struct.pack("!H", length)
        else:
            header += bytes([127]) + struct.pack("!Q", length)
        with self._lock:
            self._conn.sendall(header + payload)

    def _recv_frame(self) -> tuple[int, bytes] | None:
        head = self._read_exact(2)
        if head is None:
            return None
        fin = head[0] & 0x80
        opcode = head[0] & 0x0F
        masked = head[1] & 0x80
        length = head[1] & 0x7F
        if not fin:
            return None  # fragmentation unsupported; drop the connection
        if length == 126:
            ext = self._read_exact(2)
            if ext is None:
                return None
            length = struct.unpack("!H", ext)[0]
        elif length == 127:
            ext = self._read_exact(8)
            if ext is None:
                return None
            length = struct.unpack("!Q", ext)[0]
        mask = b""
        if masked:
            mask = self._read_exact(4) or b""
            if len(mask) < 4:
                return None
        payload = self._read_exact(length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return opcode, payload

    # -- line transport interface ------------------------------------------

    def recv_line(self) -> str | None:
        while True:
            frame = self._recv_frame()
            if frame is None:
                return None
            opcode, payload = frame
            if opcode == 0x1:  # text
                return payload.decode("utf-8", errors="replace").rstrip("\n")
            if opcode == 0x8:  # close
                try:
                    self._send_frame(0x8, payload[:2])
                except OSError:
                    pass
                return None
            if opcode == 0x9:  # ping
                self._send_frame(0xA, payload)
                continue
            # pong (0xA) and anything else: ignore
            continue

    def send_line(self, line: str) -> None:
        self._send_frame(0x1, line.encode("utf-8"))

    def close(self) -> None:
        try:
            self._send_frame(0x8, b"")
        except OSError:
            pass
        try:
            self._conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._conn.close()


def _read_http_head(conn: socket.socket) -> bytes | None:
    buf = b""
    while b"\r\n\r\n" not in buf:
        try:
            chunk = conn.recv(4096)
        except OSError:
            return None
        if not chunk:
            return None
        buf += chunk
        if len(buf) > 65536:
            return None
    return buf.split(b"\r\n\r\n", 1)[0]


def _parse_request(head: bytes) -> tuple[str, str, dict[str, str]]:
    lines = head.decode("latin-1").split("\r\n")
    parts = lines[0].split(" ")
    method, path = (parts[0], parts[1]) if len(parts) >= 2 else ("", "/")
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" in line:
            name, value = line.split(":", 1)
            headers[name.strip().lower()] = value.strip()
    return method, path, headers


class WebServer:
    """Static cockpit assets plus a WebSocket bridge to the session layer."""

    def __init__(self, config: SessionConfig, agent, static_dir: str | None = None):
        self.config = config
        self.agent = agent
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((config.host, config.http_port or 0))
        self._sock.listen(8)
        self._sock.settimeout(0.2)
        self.bound_port = self._sock.getsockname()[1]
        self._stop = threading.Event()
        self._conn_count = 0
        self.sessions_run = 0

    def serve_forever(self) -> None:
        try:
            while not self._stop.is_set():
                try:
                    conn, _addr = self._sock.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                conn.settimeout(None)
                threading.Thread(target=self._handle, args=(conn,), daemon=True).start()
        finally:
            self._sock.close()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass

    def _handle(self, conn: socket.socket) -> None:
        head = _read_http_head(conn)
        if head is None:
            conn.close()
            return
        method, path, headers = _parse_request(head)

        if headers.get("upgrade", "").lower() == "websocket" and path == "/ws":
            key = headers.get("sec-websocket-key", "")
            accept = ws_accept_key(key)
            response = (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n"
                "\r\n"
            )
            try:
                conn.sendall(response.encode("ascii"))
            except OSError:
                conn.close()
                return
            index = self._conn_count
            self._conn_count += 1
            if serve_connection(WsLineTransport(conn), self.config, self.agent,
                                self._stop, index):
                self.sessions_run += 1
            return

        if method != "GET":
            self._respond(conn, 405, b"method not allowed", "text/plain")
            return
        self._serve_static(conn, path)

    def _serve_static(self, conn: socket.socket, path: str) -> None:
        if self.static_dir is None:
            if path in ("/", "/index.html"):
                self._respond(conn, 200, _PLACEHOLDER_PAGE, "text/html; charset=utf-8")
            else:
                self._respond(conn, 404, b"not found", "text/plain")
            return
        rel = path.lstrip("/").split("?", 1)[0] or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir)) or not target.is_file():
            self._respond(conn, 404, b"not found", "text/plain")
            return
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._respond(conn, 200, target.read_bytes(), ctype)

    @staticmethod
    def _respond(conn: socket.socket, status: int, body: bytes, ctype: str) -> None:
        reason = {200: "OK", 404: "Not Found", 405: "Method Not Allowed"}.get(status, "")
        head = (
            f"HTTP/1.1 {status} {reason}\r\n"
            f"Content-Type: {ctype}\r\n"
            f"Content-Length: {len(body)}\r\n"
            "Connection: close\r\n"
            "\r\n"
        )
        try:
            conn.sendall(head.encode("ascii") + body)
        except OSError:
            pass
        finally:
            conn.close()
