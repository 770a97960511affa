"""HTTP and WebSocket facade over a driver session.

Endpoints:
  GET  /state   -> {"selected": <int|null>, "source": "shadow"|"queried"}
  POST /select  -> 204 on success, 400 on bad input, 409 when the link fails
  WS   /events  -> state snapshot on connect, then a push on every change

The WebSocket side polls the session at 50 ms, which also drains unsolicited
front-panel notifications from extended firmware, so manual changes reach
browser clients without any extra machinery.
"""

from __future__ import annotations

import asyncio

from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .errors import PortOutOfRange, SwitchError, BindFailed
from .host import Session

WS_POLL_S = 0.05


def create_app(session: Session) -> FastAPI:
    app = FastAPI(title="switch controller", docs_url=None, redoc_url=None)
    # The panel UI is served from a different origin than this API.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/state")
    def get_state() -> dict:
        return session.get_state().as_dict()

    @app.post("/select")
    async def post_select(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return Response(status_code=400, content="body must be JSON")
        port = body.get("port") if isinstance(body, dict) else None
        if isinstance(port, bool) or not isinstance(port, int):
            return Response(status_code=400, content="port must be an integer")
        try:
            await asyncio.to_thread(session.select_port, port)
        except PortOutOfRange:
            return Response(status_code=400, content="port out of range")
        except SwitchError as exc:
            return Response(status_code=409, content=str(exc))
        return Response(status_code=204)

    @app.websocket("/events")
    async def events(ws: WebSocket) -> None:
        await ws.accept()
        last = None
        try:
            while True:
                state = await asyncio.to_thread(session.get_state)
                current = state.as_dict()
                if current != last:
                    await ws.send_json({"type": "state", **current})
                    last = current
                await asyncio.sleep(WS_POLL_S)
        except (WebSocketDisconnect, RuntimeError):
            return

    return app


def serve_api(session: Session, host: str, port: int) -> None:
    """Run the API until interrupted. Raises BindFailed if the port is taken."""
    import uvicorn

    config = uvicorn.Config(
        create_app(session), host=host, port=port, log_level="warning"
    )
    server = uvicorn.Server(config)
    try:
        server.run()
    except OSError as exc:
        raise BindFailed("cannot serve on %s:%d: %s" % (host, port, exc)) from exc
