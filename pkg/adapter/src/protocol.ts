/**
 * Wire protocol: one JSON object per line on stdin, one per line on stdout.
 *
 * Request:  {id, task: "statevector", circuit: {n, ops: [{gate, angle?, qubits}]}}
 * Response: {id, statevector: [[re, im], ...], endianness: "little"}
 *       or  {id, error: {kind, message}}
 */

export interface CircuitOp {
  gate: string;
  angle?: number;
  qubits: number[];
}

export interface PortableCircuit {
  n: number;
  ops: CircuitOp[];
}

export interface AdapterRequest {
  id: number;
  task: string;
  circuit: PortableCircuit;
}

export class RequestError extends Error {
  constructor(public kind: string, message: string) {
    super(message);
  }
}

// gate table: operand count, SDK gate name, SDK parameter name (if any).
// The SDK has no "cp"; its cu1 gate is the same diagonal phase.
export const GATES: Record<string, { arity: number; sdkName: string; param: string | null }> = {
  x: { arity: 1, sdkName: "x", param: null },
  z: { arity: 1, sdkName: "z", param: null },
  h: { arity: 1, sdkName: "h", param: null },
  s: { arity: 1, sdkName: "s", param: null },
  t: { arity: 1, sdkName: "t", param: null },
  rx: { arity: 1, sdkName: "rx", param: "theta" },
  ry: { arity: 1, sdkName: "ry", param: "theta" },
  rz: { arity: 1, sdkName: "rz", param: "phi" },
  cx: { arity: 2, sdkName: "cx", param: null },
  cz: { arity: 2, sdkName: "cz", param: null },
  swap: { arity: 2, sdkName: "swap", param: null },
  cp: { arity: 2, sdkName: "cu1", param: "lambda" },
  crx: { arity: 2, sdkName: "crx", param: "theta" },
  cry: { arity: 2, sdkName: "cry", param: "theta" },
  crz: { arity: 2, sdkName: "crz", param: "phi" },
  ccx: { arity: 3, sdkName: "ccx", param: null },
  cswap: { arity: 3, sdkName: "cswap", param: null },
};

const MAX_QUBITS = 14;

export function parseRequest(line: string): AdapterRequest {
  let data: unknown;
  try {
    data = JSON.parse(line);
  } catch {
    throw new RequestError("bad_json", "request line is not valid JSON");
  }
  if (typeof data !== "object" || data === null) {
    throw new RequestError("bad_request", "request must be a JSON object");
  }
  const req = data as Record<string, unknown>;
  if (typeof req.id !== "number") {
    throw new RequestError("bad_request", "missing numeric id");
  }
  if (req.task !== "statevector") {
    throw new RequestError("unsupported_task", `unknown task ${String(req.task)}`);
  }
  const circuit = req.circuit as Record<string, unknown> | undefined;
  if (!circuit || typeof circuit !== "object") {
    throw new RequestError("bad_request", "missing circuit");
  }
  const n = circuit.n;
  if (!Number.isInteger(n) || (n as number) < 1 || (n as number) > MAX_QUBITS) {
    throw new RequestError("bad_request", `qubit count must be 1..${MAX_QUBITS}`);
  }
  if (!Array.isArray(circuit.ops)) {
    throw new RequestError("bad_request", "circuit.ops must be an array");
  }
  const ops: CircuitOp[] = [];
  for (const raw of circuit.ops) {
    const op = raw as Record<string, unknown>;
    const info = GATES[op.gate as string];
    if (!info) {
      throw new RequestError("unsupported_gate", `unknown gate ${String(op.gate)}`);
    }
    if (!Array.isArray(op.qubits) || op.qubits.length !== info.arity
        || !op.qubits.every((q) => Number.isInteger(q))) {
      throw new RequestError("bad_request", `gate ${op.gate} needs ${info.arity} qubit(s)`);
    }
    const qubits = op.qubits as number[];
    if (qubits.some((q) => q < 0 || q >= (n as number))) {
      throw new RequestError("bad_request", `qubit index out of range for n=${n}`);
    }
    if (new Set(qubits).size !== qubits.length) {
      throw new RequestError("bad_request", `gate ${op.gate} operands must be distinct`);
    }
    const hasAngle = typeof op.angle === "number" && Number.isFinite(op.angle);
    if (info.param !== null && !hasAngle) {
      throw new RequestError("bad_request", `gate ${op.gate} requires an angle`);
    }
    if (info.param === null && op.angle !== undefined) {
      throw new RequestError("bad_request", `gate ${op.gate} takes no angle`);
    }
    ops.push({ gate: op.gate as string, angle: op.angle as number | undefined, qubits });
  }
  return { id: req.id, task: "statevector", circuit: { n: n as number, ops } };
}
