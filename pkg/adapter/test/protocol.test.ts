import { describe, expect, it } from "vitest";

import { handleLine } from "../src/server";

function roundtrip(line: string): any {
  const response = handleLine(line);
  expect(response).not.toBeNull();
  return JSON.parse(response as string);
}

describe("request handling", () => {
  it("answers a well-formed request with a matching id", () => {
    const resp = roundtrip(JSON.stringify({
      id: 7,
      task: "statevector",
      circuit: { n: 1, ops: [{ gate: "x", qubits: [0] }] },
    }));
    expect(resp.id).toBe(7);
    expect(resp.endianness).toBe("little");
    expect(resp.statevector).toEqual([[0, 0], [1, 0]]);
  });

  it("ignores blank lines", () => {
    expect(handleLine("   ")).toBeNull();
  });

  it.each([
    ["not json", "bad_json"],
    ["{}", "bad_request"],
    ['{"id": 1, "task": "sample"}', "unsupported_task"],
    ['{"id": 1, "task": "statevector"}', "bad_request"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 0, "ops": []}}', "bad_request"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 1, "ops": [{"gate": "p", "qubits": [0]}]}}', "unsupported_gate"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 1, "ops": [{"gate": "x", "qubits": [3]}]}}', "bad_request"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 2, "ops": [{"gate": "cx", "qubits": [0, 0]}]}}', "bad_request"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 1, "ops": [{"gate": "rx", "qubits": [0]}]}}', "bad_request"],
    ['{"id": 1, "task": "statevector", "circuit": {"n": 1, "ops": [{"gate": "x", "angle": 1.0, "qubits": [0]}]}}', "bad_request"],
  ])("rejects %s with kind %s and keeps serving", (line, kind) => {
    const resp = roundtrip(line);
    expect(resp.error.kind).toBe(kind);
    // still alive: a valid follow-up request succeeds
    const next = roundtrip(JSON.stringify({
      id: 2,
      task: "statevector",
      circuit: { n: 1, ops: [] },
    }));
    expect(next.statevector[0]).toEqual([1, 0]);
  });

  it("maps the diagonal-phase gate onto the SDK's cu1", () => {
    const resp = roundtrip(JSON.stringify({
      id: 3,
      task: "statevector",
      circuit: {
        n: 2,
        ops: [
          { gate: "x", qubits: [0] },
          { gate: "x", qubits: [1] },
          { gate: "cp", angle: Math.PI / 2, qubits: [0, 1] },
        ],
      },
    }));
    const [re, im] = resp.statevector[3];
    expect(re).toBeCloseTo(0, 10);
    expect(im).toBeCloseTo(1, 10);
  });
});
