# Copyright 2026 The Ghostpatch Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Checks the detection wire protocol: schemas, golden fixtures and a live mock server."""

import argparse
import contextlib
import json
import pathlib
import socket
import subprocess
import sys
import time

import jsonschema
import requests

FAILURES = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        FAILURES.append(what)


def load(path):
    return json.loads(pathlib.Path(path).read_text())


def validator(schemas, name):
    schema = load(schemas / f"{name}.schema.json")
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def free_port():
    with contextlib.closing(socket.socket()) as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@contextlib.contextmanager
def mock_server(cli):
    port = free_port()
    proc = subprocess.Popen([cli, "serve-mock", "--port", str(port), "--host", "127.0.0.1"],
                            stderr=subprocess.DEVNULL)
    url = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                requests.get(url + "/v1/health", timeout=1)
                break
            except requests.ConnectionError:
                time.sleep(0.1)
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schemas", type=pathlib.Path, required=True)
    ap.add_argument("--fixtures", type=pathlib.Path, required=True)
    ap.add_argument("--cli", required=True)
    args = ap.parse_args()

    names = ["detect_request", "detect_response", "error", "health", "info"]
    v = {n: validator(args.schemas, n) for n in names}
    check(True, "all schemas are valid JSON Schema")

    for req in sorted(args.fixtures.glob("detect_request*.json")):
        check(v["detect_request"].is_valid(load(req)), f"{req.name} matches the request schema")
    for resp in sorted(args.fixtures.glob("detect_response*.json")):
        check(v["detect_response"].is_valid(load(resp)), f"{resp.name} matches the response schema")
    invalid = sorted((args.fixtures / "invalid").glob("*.json"))
    check(len(invalid) >= 8, f"{len(invalid)} invalid response fixtures present")
    for bad in invalid:
        check(not v["detect_response"].is_valid(load(bad)), f"invalid/{bad.name} is rejected")

    with mock_server(args.cli) as url:
        health = requests.get(url + "/v1/health", timeout=10)
        check(health.status_code == 200 and v["health"].is_valid(health.json()),
              "GET /v1/health matches the health schema")
        info = requests.get(url + "/v1/info", timeout=10)
        check(info.status_code == 200 and v["info"].is_valid(info.json()),
              "GET /v1/info matches the info schema")

        golden = {
            "detect_request.json": "detect_response.json",
            "detect_request_min_score.json": "detect_response_empty.json",
            "detect_request_blank.json": "detect_response_empty.json",
        }
        for req_name, resp_name in golden.items():
            r = requests.post(url + "/v1/detect", json=load(args.fixtures / req_name), timeout=60)
            body = r.json()
            check(r.status_code == 200 and v["detect_response"].is_valid(body),
                  f"live response to {req_name} matches the response schema")
            expected = load(args.fixtures / resp_name)
            body.pop("elapsed_ms", None)
            expected.pop("elapsed_ms", None)
            check(body == expected, f"live response to {req_name} equals {resp_name}")

        r = requests.post(url + "/v1/detect", data=b"not json",
                          headers={"Content-Type": "application/json"}, timeout=10)
        check(r.status_code == 400 and v["error"].is_valid(r.json()),
              "malformed request yields a 400 error body")
        r = requests.post(url + "/v1/detect", json={"image_png_b64": "AAAA"}, timeout=10)
        check(r.status_code == 400 and v["error"].is_valid(r.json()),
              "undecodable image yields a 400 error body")

    print(f"{len(FAILURES)} failures")
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
