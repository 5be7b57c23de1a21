"""Wire protocol conformance over the dispatcher, HTTP and TCP transports."""

import json
import socket
import urllib.request

import pytest

from chrv.driver import Driver
from chrv.tracer import from_xml, validate_xml
from chrv.wire import LineProtocolServer, dispatch, make_http_server, serve_forever_in_thread
from conftest import LEQ_QUERY, LEQ_SOURCE


def rpc(driver, **request):
    return dispatch(driver, request)


class TestDispatch:
    def test_load_step_export(self):
        driver = Driver()
        response = rpc(driver, id=1, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        assert response == {"id": 1, "ok": True, "status": "paused"}
        chronos = []
        for i in range(9):
            response = rpc(driver, id=i + 2, op="step")
            assert response["ok"]
            if response["event"] is None:
                break
            chronos.append(response["event"]["chrono"])
        assert chronos == list(range(1, 9))
        assert response["status"] == "finished"
        xml = rpc(driver, op="export_xml")["xml"]
        validate_xml(xml)
        assert len(from_xml(xml)) == 8

    def test_continue_matches_batch_run(self, leq_program, leq_query):
        from chrv.tracer import trace_run

        expected, _ = trace_run(leq_program, leq_query)
        driver = Driver()
        rpc(driver, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        response = rpc(driver, id="c", op="control", cmd="continue")
        got = [(e["chrono"], e["kind"], e["attributes"]) for e in response["events"]]
        assert got == [(e.chrono, e.kind, dict(e.attributes)) for e in expected]

    def test_filter_and_fetch(self):
        driver = Driver()
        rpc(driver, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        rpc(driver, op="control", cmd="continue")
        rpc(driver, op="filter", analyzer="ui", query={"kinds": ["apply"]})
        events = rpc(driver, op="fetch", analyzer="ui")["events"]
        assert [e["chrono"] for e in events] == [4, 7, 8]
        ranged = rpc(driver, op="fetch", range=[2, 3], query=None)["events"]
        assert [e["chrono"] for e in ranged] == [2, 3]

    def test_fetch_with_state(self):
        driver = Driver()
        rpc(driver, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        rpc(driver, op="control", cmd="continue")
        response = rpc(driver, op="fetch", range=[7, 7], with_state=True)
        assert response["states"]["7"]["bics"] == "A=C"

    def test_errors(self):
        driver = Driver()
        assert rpc(driver, op="step")["error"]["code"] == "NoActiveSession"
        assert rpc(driver, op="load", program="p <=>.", query="")["error"]["code"] == "ParseError"
        assert rpc(driver, op="nonsense")["error"]["code"] == "UnknownOp"
        rpc(driver, op="load", program="r@ p <=> p.", query="p", budget=10)
        assert rpc(driver, op="control", cmd="continue")["error"]["code"] == "BudgetExceeded"

    def test_status_op(self):
        driver = Driver()
        assert rpc(driver, op="status")["status"] == "idle"
        rpc(driver, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        info = rpc(driver, op="status")
        assert info["status"] == "paused" and info["query"] == LEQ_QUERY


@pytest.fixture
def http_server():
    driver = Driver()
    server = make_http_server(driver, "127.0.0.1", 0)
    serve_forever_in_thread(server)
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def http_rpc(url, **request):
    data = json.dumps(request).encode()
    req = urllib.request.Request(f"{url}/rpc", data=data, headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as response:
        return json.loads(response.read())


class TestHttpTransport:
    def test_load_continue_export(self, http_server):
        assert http_rpc(http_server, id=1, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)["ok"]
        response = http_rpc(http_server, id=2, op="control", cmd="continue")
        assert response["status"] == "finished"
        assert [e["chrono"] for e in response["events"]] == list(range(1, 9))
        xml = http_rpc(http_server, id=3, op="export_xml")["xml"]
        validate_xml(xml)

    def test_step_one_event_per_request(self, http_server):
        http_rpc(http_server, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        first = http_rpc(http_server, op="step")["event"]
        second = http_rpc(http_server, op="step")["event"]
        assert (first["chrono"], second["chrono"]) == (1, 2)

    def test_mid_session_export_is_valid(self, http_server):
        http_rpc(http_server, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)
        for _ in range(3):
            http_rpc(http_server, op="step")
        xml = http_rpc(http_server, op="export_xml")["xml"]
        validate_xml(xml)
        assert len(from_xml(xml)) == 3

    def test_health_endpoint(self, http_server):
        with urllib.request.urlopen(f"{http_server}/healthz") as response:
            assert json.loads(response.read())["ok"]


class TestTcpTransport:
    def test_line_protocol_session(self):
        server = LineProtocolServer(Driver(), "127.0.0.1", 0)
        serve_forever_in_thread(server)
        host, port = server.server_address
        try:
            with socket.create_connection((host, port)) as conn:
                stream = conn.makefile("rwb")

                def send(**request):
                    stream.write(json.dumps(request).encode() + b"\n")
                    stream.flush()
                    return json.loads(stream.readline())

                assert send(id=1, op="load", program=LEQ_SOURCE, query=LEQ_QUERY)["ok"]
                chronos = []
                while True:
                    response = send(op="step")
                    if response["event"] is None:
                        break
                    chronos.append(response["event"]["chrono"])
                assert chronos == list(range(1, 9))
        finally:
            server.shutdown()
