"""HTTP service exposing the closed loop.

Endpoints (JSON unless noted):
  GET  /layout                      flicker table for the UI
  GET  /schedule?k=..&frames=..     per-frame luminance for one key
  GET  /config                      runtime configuration
  GET  /metrics                     latency / decode counters
  POST /session                     new session id
  GET  /session/{id}                state snapshot
  POST /session/{id}/eeg            one EegWindow (JSON or the binary format)
  POST /session/{id}/feedback       manual or pooled-decoded satisfaction
  POST /session/{id}/event          direct decoded event (debug/UI fallback)
  GET  /session/{id}/stream         server-sent events: every accepted event
  POST /synth                       synthesize a window server-side

Sessions are single-writer: a per-session lock serializes steps while
different sessions proceed concurrently.
"""

from __future__ import annotations

import json
import mimetypes
import queue
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import DomainError, NeurosearchError, NoDecision, PhaseError
from .metrics import MetricsRegistry
from .session import Session, SessionAssets
from .stimulus import layout_table, luminance_schedule, tag_for_target
from .synth import EegWindow, SynthSpec, synth_background, synth_satisfaction_eeg, synth_ssvep


class UnknownSession(NeurosearchError):
    def __init__(self, sid: str):
        self.sid = sid
        super().__init__(f"unknown session {sid!r}")


class _SessionRecord:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.subscribers: list[queue.Queue] = []
        self.sub_lock = threading.Lock()

    def broadcast(self, payload: dict) -> None:
        with self.sub_lock:
            for q in list(self.subscribers):
                q.put(payload)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self.sub_lock:
            self.subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self.sub_lock:
            if q in self.subscribers:
                self.subscribers.remove(q)


class NeurosearchServer:
    def __init__(
        self,
        assets: SessionAssets,
        host: str = "127.0.0.1",
        port: int = 0,
        log_dir=None,
        ui_dir=None,
    ):
        self.assets = assets
        self.metrics = MetricsRegistry()
        self.sessions: dict[str, _SessionRecord] = {}
        self.sessions_lock = threading.Lock()
        self.log_dir = Path(log_dir) if log_dir else None
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        service = self

        class Handler(_ServiceHandler):
            svc = service

        self.httpd = ThreadingHTTPServer((host, port), Handler)
        self.httpd.daemon_threads = True
        self.host, self.port = self.httpd.server_address[:2]
        self._thread: threading.Thread | None = None

    # --- lifecycle ---------------------------------------------------------------

    def start_background(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    # --- session plumbing ----------------------------------------------------------

    def create_session(self) -> str:
        sid = uuid.uuid4().hex[:12]
        with self.sessions_lock:
            self.sessions[sid] = _SessionRecord(Session(self.assets, session_id=sid))
        return sid

    def record(self, sid: str) -> _SessionRecord:
        with self.sessions_lock:
            rec = self.sessions.get(sid)
        if rec is None:
            raise UnknownSession(sid)
        return rec

    def persist_event(self, session: Session) -> None:
        if not self.log_dir:
            return
        event = session.state.event_log[-1]
        line = json.dumps({"session": session.session_id, "event": event}, ensure_ascii=False)
        with open(self.log_dir / f"{session.session_id}.jsonl", "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def apply_event(self, rec: _SessionRecord, event, decode_ms: float | None = None) -> dict:
        """Step a session under its lock and fan the result out."""
        with rec.lock:
            state, actions = rec.session.step(event)
            logged = state.event_log[-1]
            snapshot = state.snapshot()
            self.persist_event(rec.session)
        payload = {"event": logged, "actions": actions, "state": snapshot}
        if decode_ms is not None:
            payload["decode_ms"] = decode_ms
        rec.broadcast(payload)
        return payload


class _ServiceHandler(BaseHTTPRequestHandler):
    svc: NeurosearchServer = None  # bound by subclass
    protocol_version = "HTTP/1.1"

    # --- helpers -------------------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        del fmt, args

    def _send_json(self, code: int, obj: dict) -> None:
        body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length) if length else b""

    def _read_json(self) -> dict:
        body = self._read_body()
        if not body:
            return {}
        try:
            return json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DomainError(f"malformed JSON body: {exc}") from exc

    # --- routing -------------------------------------------------------------------

    def do_GET(self):
        try:
            self._route_get()
        except BrokenPipeError:
            pass
        except UnknownSession as exc:
            self._send_json(404, {"error": str(exc)})
        except (NeurosearchError, ValueError, KeyError) as exc:
            self._send_json(400, {"error": str(exc)})

    def do_POST(self):
        try:
            self._route_post()
        except UnknownSession as exc:
            self._send_json(404, {"error": str(exc)})
        except PhaseError as exc:
            self._send_json(409, {"error": str(exc)})
        except (NeurosearchError, ValueError, KeyError) as exc:
            self._send_json(400, {"error": str(exc)})

    def _route_get(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if url.path == "/layout":
            cfg = self.svc.assets.config
            self._send_json(
                200,
                {
                    "refresh_rate": cfg.refresh_rate,
                    "sampling_rate": cfg.sampling_rate,
                    "keys": layout_table(self.svc.assets.stimulus_config),
                },
            )
        elif url.path == "/schedule":
            params = parse_qs(url.query)
            k = int(params.get("k", ["1"])[0])
            frames = int(params.get("frames", ["60"])[0])
            tag = tag_for_target(k, self.svc.assets.stimulus_config)
            sched = luminance_schedule(tag, frames, self.svc.assets.config.refresh_rate)
            self._send_json(200, {"k": k, "f": tag.f, "phi": tag.phi, "frames": sched})
        elif url.path == "/config":
            self._send_json(200, vars(self.svc.assets.config))
        elif url.path == "/metrics":
            self._send_json(200, self.svc.metrics.snapshot())
        elif len(parts) == 2 and parts[0] == "session":
            rec = self.svc.record(parts[1])
            with rec.lock:
                snapshot = rec.session.state.snapshot()
            self._send_json(200, snapshot)
        elif len(parts) == 3 and parts[0] == "session" and parts[2] == "stream":
            self._stream_session(parts[1])
        elif self.svc.ui_dir:
            self._serve_static(url.path)
        else:
            self._send_json(404, {"error": f"no route {url.path}"})

    def _route_post(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if url.path == "/session":
            sid = self.svc.create_session()
            self._send_json(200, {"session_id": sid})
        elif url.path == "/synth":
            self._synth()
        elif len(parts) == 3 and parts[0] == "session":
            sid, action = parts[1], parts[2]
            rec = self.svc.record(sid)
            if action == "eeg":
                self._post_eeg(rec)
            elif action == "feedback":
                body = self._read_json()
                event = {"kind": "feedback"}
                for key in ("verdict", "probability", "source"):
                    if key in body:
                        event[key] = body[key]
                payload = self.svc.apply_event(rec, event)
                self.svc.metrics.bump("feedback_count")
                self._send_json(200, payload)
            elif action == "event":
                event = self._read_json()
                payload = self.svc.apply_event(rec, event)
                self._send_json(200, payload)
            else:
                self._send_json(404, {"error": f"no route {url.path}"})
        else:
            self._send_json(404, {"error": f"no route {url.path}"})

    # --- endpoint bodies ---------------------------------------------------------

    def _post_eeg(self, rec: _SessionRecord):
        ctype = (self.headers.get("Content-Type") or "").split(";")[0].strip()
        body = self._read_body()
        if ctype == "application/octet-stream":
            window = EegWindow.from_bytes(body)
        else:
            try:
                obj = json.loads(body.decode("utf-8")) if body else {}
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise DomainError(f"malformed window body: {exc}") from exc
            window = EegWindow.from_json_dict(obj)
        t0 = time.perf_counter()
        try:
            with rec.lock:
                event = rec.session.decode_window(window)
        except NoDecision:
            self.svc.metrics.bump("no_decision_count")
            self._send_json(
                200,
                {
                    "no_decision": True,
                    "retry_window_s": self.svc.assets.config.retry_window_s,
                },
            )
            return
        decode_ms = (time.perf_counter() - t0) * 1000.0
        self.svc.metrics.record_latency(decode_ms)
        self.svc.metrics.bump("decode_count")
        try:
            payload = self.svc.apply_event(rec, event, decode_ms=decode_ms)
        except PhaseError:
            self.svc.metrics.bump("rejected_count")
            raise
        self._send_json(200, payload)

    def _synth(self):
        body = self._read_json()
        cfg = self.svc.assets.config
        kind = body.get("kind", "speller")
        duration = float(body.get("duration_s", cfg.window_s))
        seed = int(body.get("seed", int(time.time() * 1000) % 2**31))
        if kind == "speller":
            if "k" not in body:
                raise DomainError("speller synth needs a target index k")
            k = int(body["k"])
            tag = tag_for_target(k, self.svc.assets.stimulus_config)
            snr = body.get("snr_db", 5.0)
            spec = SynthSpec(
                duration=duration,
                sampling_rate=cfg.sampling_rate,
                n_channels=9,
                n_harmonics=cfg.n_harmonics,
                snr_db=None if snr is None else float(snr),
                seed=seed,
            )
            window = synth_ssvep(spec, tag)
        elif kind == "satisfaction":
            window = synth_satisfaction_eeg(
                satisfied=bool(body.get("satisfied", True)),
                duration=duration,
                sampling_rate=cfg.sampling_rate,
                strength=float(body.get("strength", 0.4)),
                seed=seed,
            )
        elif kind == "background":
            spec = SynthSpec(
                duration=duration,
                sampling_rate=cfg.sampling_rate,
                n_channels=int(body.get("n_channels", 9)),
                seed=seed,
            )
            window = synth_background(spec)
        else:
            raise DomainError(f"unknown synth kind {kind!r}")
        self._send_json(200, window.to_json_dict())

    def _stream_session(self, sid: str):
        rec = self.svc.record(sid)
        q = rec.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            while True:
                try:
                    payload = q.get(timeout=15.0)
                    data = json.dumps(payload, ensure_ascii=False)
                    self.wfile.write(f"data: {data}\n\n".encode("utf-8"))
                except queue.Empty:
                    self.wfile.write(b": ping\n\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            rec.unsubscribe(q)

    def _serve_static(self, path: str):
        rel = path.lstrip("/") or "index.html"
        target = (self.svc.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.svc.ui_dir)) or not target.is_file():
            self._send_json(404, {"error": f"no route {path}"})
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def build_server(
    assets: SessionAssets | None = None,
    host: str = "127.0.0.1",
    port: int = 0,
    log_dir=None,
    ui_dir=None,
) -> NeurosearchServer:
    return NeurosearchServer(
        assets or SessionAssets.bundled(), host=host, port=port, log_dir=log_dir, ui_dir=ui_dir
    )
