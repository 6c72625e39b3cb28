import json

import httpx
import pytest

from treedrive.agents import (
    ChatError,
    HTTPChatClient,
    Message,
    RecordingChatClient,
    ReplayChatClient,
)
from treedrive.agents.client import ENV_ENDPOINT, ENV_MODEL

MESSAGES = [Message("system", "sys"), Message("user", "hello")]


def ok(content):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant",
                                                              "content": content}}]})


def client_with(handler, **kw):
    return HTTPChatClient("http://llm.invalid/v1", "m", api_key="k",
                          transport=httpx.MockTransport(handler), backoff=0.0, **kw)


def test_request_shape():
    seen = []

    def handler(request):
        seen.append(request)
        return ok("hi")

    c = client_with(handler, temperature=0.2)
    assert c.send(MESSAGES) == "hi"
    req = seen[0]
    assert str(req.url) == "http://llm.invalid/v1/chat/completions"
    assert req.headers["authorization"] == "Bearer k"
    body = json.loads(req.content)
    assert body == {"model": "m", "temperature": 0.2,
                    "messages": [{"role": "system", "content": "sys"},
                                 {"role": "user", "content": "hello"}]}


def test_retries_transient_status_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(503 if len(calls) == 1 else 429, headers={"Retry-After": "0"})
        return ok("done")

    assert client_with(handler).send(MESSAGES) == "done"
    assert len(calls) == 3


def test_gives_up_after_max_retries():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(500, text="boom")

    with pytest.raises(ChatError, match="500"):
        client_with(handler, max_retries=2).send(MESSAGES)
    assert len(calls) == 3


def test_client_errors_are_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="denied")

    with pytest.raises(ChatError, match="401"):
        client_with(handler).send(MESSAGES)
    assert len(calls) == 1


def test_transport_error_and_bad_body():
    def broken(request):
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(ChatError, match="failed"):
        client_with(broken, max_retries=1).send(MESSAGES)
    with pytest.raises(ChatError, match="unexpected response"):
        client_with(lambda r: httpx.Response(200, json={"nope": 1})).send(MESSAGES)


def test_from_env(monkeypatch):
    monkeypatch.delenv(ENV_ENDPOINT, raising=False)
    monkeypatch.delenv(ENV_MODEL, raising=False)
    with pytest.raises(ChatError):
        HTTPChatClient.from_env()
    monkeypatch.setenv(ENV_ENDPOINT, "http://x.invalid")
    monkeypatch.setenv(ENV_MODEL, "m1")
    c = HTTPChatClient.from_env({"llm_model": "m2"})
    assert c.model == "m2" and c.url == "http://x.invalid/chat/completions"


def test_replay_client_validates_script():
    with pytest.raises(ChatError):
        ReplayChatClient({"a": "x"}, ["a", "b"])


def test_record_then_replay_round_trip(tmp_path):
    replies = iter(["first", "second", "third"])
    live = client_with(lambda r: ok(next(replies)))
    rec = RecordingChatClient(live, tmp_path / "fx")
    got = [rec.send(MESSAGES) for _ in range(3)]
    replay = ReplayChatClient.from_dir(tmp_path / "fx")
    assert [replay.send(MESSAGES) for _ in range(3)] == got
    assert replay.served == ["reply_001", "reply_002", "reply_003"]
