"""HTTP solve API for the browser explorer.

Stateless JSON endpoints over the standard library threading server:

    GET  /healthz                 liveness probe
    GET  /api/fixtures            fixture catalog
    GET  /api/fixtures/{name}     model file for a fixture (query params override defaults)
    POST /api/solve               one solve: mode linear | formfind | compare
    POST /api/solve/batch         multi-seed form-finding, per-seed energies

Every solve is deterministic given the request body; batch seeds run on a
thread pool but share no mutable state.
"""

from __future__ import annotations

import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, urlparse

import numpy as np

from . import analysis, fileio, fixtures, linear_fdm, optimizer
from .cli import _default_force_densities, _parse_functional
from .model import ModelError

DEFAULT_PORT = 8707
DEFAULT_WALL_CLOCK_LIMIT = 60.0  # seconds per solve


class ApiError(Exception):
    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("error", "api error"))
        self.status = status
        self.payload = payload


def _options_from_request(body: dict) -> optimizer.SolveOptions:
    raw = body.get("options", {}) or {}
    try:
        options = optimizer.SolveOptions(
            max_iterations=int(raw.get("max_iterations", 200_000)),
            gradient_tolerance=float(raw.get("gradient_tolerance", 1e-8)),
            seed=int(raw.get("seed", 0)),
            method=raw.get("method", optimizer.METHOD_DESCENT),
            wall_clock_limit=float(raw.get("wall_clock_limit", DEFAULT_WALL_CLOCK_LIMIT)),
            trace_every=16,
        )
        init = raw.get("init", {"kind": "random", "range": 2.5})
        if init.get("kind") == "given":
            options.init = optimizer.GivenInit(np.asarray(init["coords"], dtype=float))
        elif init.get("kind") == "model":
            options.init = "model"  # type: ignore[assignment]  # resolved with the model
        else:
            options.init = optimizer.RandomInit(float(init.get("range", 2.5)))
    except (AttributeError, KeyError, TypeError, ValueError) as err:
        raise ApiError(400, {"error": f"malformed solve options: {err}"})
    return options


def _load_request_model(body: dict):
    if "model" not in body:
        raise ApiError(400, {"error": "request body must carry an inline model"})
    try:
        return fileio.model_from_dict(body["model"])
    except fileio.ModelLoadError as err:
        raise ApiError(400, {"error": "invalid model", "problems": err.problems})


def _resolve_init(options, model):
    if options.init == "model":  # type: ignore[comparison-overlap]
        options.init = optimizer.GivenInit(model.free_coords())
    return options


def _null_space_payload(report: linear_fdm.NullSpaceReport) -> dict:
    return {
        "rank": report.rank,
        "nullity": report.nullity,
        "tol": report.tol,
        "basis": [[float(v) for v in report.basis[:, c]]
                  for c in range(report.basis.shape[1])],
    }


def _state_payload(model, state: optimizer.ConvergedState, mode: str, seed: int) -> dict:
    payload = fileio.state_to_dict(model, state, mode=mode, seed=seed)
    del payload["model"]  # the caller already has it
    return payload


def solve_once(body: dict) -> dict:
    """Dispatch one SolveRequest; raises ApiError with the proper HTTP status."""
    mode = body.get("mode", "formfind")
    model = _load_request_model(body)

    if mode == "linear":
        q = body.get("force_densities")
        try:
            q = np.asarray(q, dtype=float) if q is not None else _default_force_densities(model)
            solution = linear_fdm.solve_linear_fdm(model, q)
        except linear_fdm.SingularSystem as err:
            raise ApiError(400, {"error": str(err), "mode": mode,
                                 "null_space": _null_space_payload(err.report)})
        except (ModelError, ValueError) as err:
            raise ApiError(400, {"error": str(err), "mode": mode})
        return {
            "mode": mode,
            "converged": True,
            "positions": [[float(v) for v in row] for row in solution.positions],
            "lengths": [float(v) for v in solution.lengths],
            "tensions": [float(v) for v in solution.tensions],
        }

    if mode == "formfind":
        options = _resolve_init(_options_from_request(body), model)
        state = optimizer.minimize_constrained(model, options)
        payload = _state_payload(model, state, mode, options.seed)
        if not state.converged:
            raise ApiError(422, {"error": "solver did not converge",
                                 "result": payload})
        report = analysis.equilibrium_residual(model, state.coords, state.forces)
        payload["residual_rel"] = report.residual_rel
        return payload

    if mode == "compare":
        options = _resolve_init(_options_from_request(body), model)
        entries = [_parse_functional(item) for item in body.get("functionals", [])]
        if not entries:
            raise ApiError(400, {"error": "compare mode needs a functionals list"})
        rows = analysis.compare_functionals(model, entries, options)
        return {
            "mode": mode,
            "seed": options.seed,
            "rows": [{
                "label": r.label, "converged": r.converged, "energy": r.energy,
                "total_length": r.total_length, "total_area": r.total_area,
                "area_mean": r.area_mean, "area_cv": r.area_cv, "error": r.error,
            } for r in rows],
        }

    raise ApiError(400, {"error": f"unknown mode {mode!r}"})


def solve_batch(body: dict) -> dict:
    """Multi-seed exploration; states are independent and collected in seed order."""
    model = _load_request_model(body)
    base = _options_from_request(body)
    seeds = body.get("seeds")
    if seeds is None:
        count = int(body.get("n_seeds", 0))
        seeds = list(range(base.seed, base.seed + count))
    if not seeds:
        raise ApiError(400, {"error": "batch needs seeds or n_seeds"})

    def run_seed(seed: int) -> dict:
        options = _resolve_init(_options_from_request(body), model)
        options.seed = int(seed)
        state = optimizer.minimize_constrained(model, options)
        return _state_payload(model, state, "formfind", options.seed)

    with ThreadPoolExecutor(max_workers=min(8, len(seeds))) as pool:
        results = list(pool.map(run_seed, seeds))
    return {
        "mode": "batch",
        "results": results,
        "energies": [r["energy"] for r in results],
    }


class Handler(BaseHTTPRequestHandler):
    server_version = "tensiform"

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self._send(204, {})

    def do_GET(self):
        url = urlparse(self.path)
        try:
            if url.path == "/healthz":
                self._send(200, {"status": "ok"})
            elif url.path == "/api/fixtures":
                self._send(200, {"fixtures": [fixtures.fixture_info(name)
                                              for name in fixtures.fixture_names()]})
            elif url.path.startswith("/api/fixtures/"):
                name = url.path.rsplit("/", 1)[1]
                params = {k: json.loads(v) if _is_number(v) else v
                          for k, v in parse_qsl(url.query)}
                try:
                    model = fixtures.build_fixture(name, params)
                except KeyError as err:
                    self._send(404, {"error": str(err)})
                    return
                except (TypeError, ValueError) as err:
                    self._send(400, {"error": f"bad fixture parameters: {err}"})
                    return
                self._send(200, fileio.model_to_dict(model))
            else:
                self._send(404, {"error": f"no route {url.path}"})
        except Exception:
            self._send(500, {"error": "internal error", "detail": traceback.format_exc()})

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as err:
            self._send(400, {"error": f"malformed JSON body: {err}"})
            return
        try:
            if self.path == "/api/solve":
                self._send(200, solve_once(body))
            elif self.path == "/api/solve/batch":
                self._send(200, solve_batch(body))
            else:
                self._send(404, {"error": f"no route {self.path}"})
        except ApiError as err:
            self._send(err.status, err.payload)
        except Exception:
            self._send(500, {"error": "internal error", "detail": traceback.format_exc()})


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def make_server(port: int = DEFAULT_PORT, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), Handler)


def run(port: int = DEFAULT_PORT, host: str = "127.0.0.1") -> None:
    server = make_server(port, host)
    print(f"tensiform API listening on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
