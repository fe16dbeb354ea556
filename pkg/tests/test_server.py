import json
import threading
from urllib.request import Request, urlopen
from urllib.error import HTTPError

import numpy as np
import pytest

from tensiform import fixtures, fileio
from tensiform.server import make_server


@pytest.fixture(scope="module")
def api():
    server = make_server(port=0)  # ephemeral port
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base
    server.shutdown()


def get(base, path):
    with urlopen(base + path) as response:
        return response.status, json.loads(response.read()), dict(response.headers)


def post(base, path, body):
    data = json.dumps(body).encode()
    request = Request(base + path, data=data, headers={"Content-Type": "application/json"})
    try:
        with urlopen(request) as response:
            return response.status, json.loads(response.read())
    except HTTPError as err:
        return err.code, json.loads(err.read())


def simplex_request(seed=0, **options):
    return {
        "mode": "formfind",
        "model": fileio.model_to_dict(fixtures.make_simplex()),
        "options": {"seed": seed, **options},
    }


def test_healthz(api):
    status, body, _ = get(api, "/healthz")
    assert status == 200 and body == {"status": "ok"}


def test_fixture_catalog(api):
    status, body, _ = get(api, "/api/fixtures")
    names = [f["name"] for f in body["fixtures"]]
    assert status == 200
    assert "simplex" in names and "cuboctahedron" in names


def test_fixture_model_with_query_params(api):
    status, body, _ = get(api, "/api/fixtures/strut20?connection=5")
    assert status == 200
    model = fileio.model_from_dict(body)
    assert model.cables[0].endpoints == (0, 10)


def test_fixture_unknown_name_404(api):
    try:
        urlopen(api + "/api/fixtures/moebius")
        raise AssertionError("expected 404")
    except HTTPError as err:
        assert err.code == 404


def test_fixture_bad_params_400(api):
    try:
        urlopen(api + "/api/fixtures/strut20?connection=99")
        raise AssertionError("expected 400")
    except HTTPError as err:
        assert err.code == 400


def test_solve_simplex_converges(api):
    status, body = post(api, "/api/solve", simplex_request(seed=3))
    assert status == 200
    assert body["converged"] is True
    assert body["seed"] == 3
    assert body["mode"] == "formfind"
    assert len(body["coords"]) == 18
    assert body["residual_rel"] <= 1e-6


def test_solve_is_deterministic_and_byte_identical(api):
    first = post(api, "/api/solve", simplex_request(seed=11))
    second = post(api, "/api/solve", simplex_request(seed=11))
    assert first == second
    assert json.dumps(first[1]["coords"]) == json.dumps(second[1]["coords"])


def test_all_fixed_model_is_400(api):
    data = fileio.model_to_dict(fixtures.make_net(2, 2))
    for node in data["nodes"]:
        node["fixed"] = True
    status, body = post(api, "/api/solve", {"mode": "formfind", "model": data})
    assert status == 400
    assert "problems" in body


def test_missing_model_is_400(api):
    status, body = post(api, "/api/solve", {"mode": "formfind"})
    assert status == 400


def test_nonconvergence_is_422_with_partial_trace(api):
    status, body = post(api, "/api/solve", simplex_request(seed=0, max_iterations=3))
    assert status == 422
    assert body["result"]["converged"] is False
    assert len(body["result"]["trace"]) >= 1


def test_linear_mode_and_null_space_diagnostic(api):
    model = fileio.model_to_dict(fixtures.make_x_tensegrity())
    status, body = post(api, "/api/solve", {
        "mode": "linear", "model": model, "force_densities": [1, 1, 1, 1, -1, -1]})
    assert status == 400
    assert body["null_space"]["nullity"] == 3

    net = fileio.model_to_dict(fixtures.make_net(4, 4))
    status, body = post(api, "/api/solve", {"mode": "linear", "model": net})
    assert status == 200
    assert len(body["positions"]) == 16


def test_compare_mode(api):
    ring = fileio.model_to_dict(fixtures.make_ring_membrane(4.0, n_radial=4, n_hoop=10))
    status, body = post(api, "/api/solve", {
        "mode": "compare", "model": ring,
        "functionals": ["plain_area", "power_area:w=1:p=2"],
        "options": {"seed": 1, "gradient_tolerance": 1e-5, "init": {"kind": "model"}},
    })
    assert status == 200
    assert len(body["rows"]) == 2
    assert body["rows"][1]["area_cv"] < body["rows"][0]["area_cv"]


def test_unknown_mode_is_400(api):
    status, body = post(api, "/api/solve", {
        "mode": "annihilate", "model": fileio.model_to_dict(fixtures.make_simplex())})
    assert status == 400


def test_given_init_over_the_wire(api):
    model = fixtures.make_simplex()
    coords = [float(v) for v in model.free_coords()]
    body = {
        "mode": "formfind",
        "model": fileio.model_to_dict(model),
        "options": {"seed": 0, "init": {"kind": "given", "coords": coords}},
    }
    status, result = post(api, "/api/solve", body)
    assert status == 200 and result["converged"]


def test_malformed_options_is_400(api):
    body = simplex_request()
    body["options"] = {"init": {"kind": "given"}}  # missing coords
    status, result = post(api, "/api/solve", body)
    assert status == 400
    assert "options" in result["error"]


def test_batch_returns_per_seed_energies(api):
    body_in = simplex_request()
    body_in["seeds"] = [0, 1, 2, 3]
    status, body = post(api, "/api/solve/batch", body_in)
    assert status == 200
    assert len(body["results"]) == 4
    assert [r["seed"] for r in body["results"]] == [0, 1, 2, 3]
    assert len(body["energies"]) == 4
    reference = post(api, "/api/solve", simplex_request(seed=2))[1]
    assert body["results"][2]["coords"] == reference["coords"]


def test_batch_without_seeds_is_400(api):
    status, _ = post(api, "/api/solve/batch", simplex_request())
    assert status == 400


def test_cors_headers_present(api):
    _, _, headers = get(api, "/healthz")
    assert headers["Access-Control-Allow-Origin"] == "*"


def test_cli_and_http_paths_agree(api, tmp_path):
    from tensiform.cli import main
    model_path = tmp_path / "simplex.json"
    fileio.save_model(fixtures.make_simplex(), model_path)
    state_path = tmp_path / "state.json"
    assert main(["form-find", str(model_path), "--seed", "5", "--out", str(state_path)]) == 0
    _, cli_state = fileio.load_state(state_path)

    status, http_state = post(api, "/api/solve", simplex_request(seed=5))
    assert status == 200
    assert http_state["coords"] == cli_state["coords"]


def test_port_env_override(monkeypatch):
    from tensiform.cli import build_parser
    import tensiform.cli as cli_module
    monkeypatch.setenv("TENSIFORM_PORT", "9123")
    captured = {}
    monkeypatch.setattr("tensiform.server.run", lambda port: captured.update(port=port))
    args = build_parser().parse_args(["serve", "--port", "8000"])
    assert args.func(args) == 0
    assert captured["port"] == 9123
