/**
 * Circuit execution on the quantum-circuit SDK.
 *
 * The SDK indexes basis states little-endian (qubit 0 is the least
 * significant bit of the state array index) and lists controls before
 * targets, which matches the wire format; verified by the test suite, and
 * every response still declares its endianness explicitly.
 */
import QuantumCircuit from "quantum-circuit";

import { GATES, PortableCircuit, RequestError } from "./protocol";

export type AmplitudePair = [number, number];

export function statevector(circuit: PortableCircuit): AmplitudePair[] {
  const qc = new QuantumCircuit(circuit.n);
  circuit.ops.forEach((op, column) => {
    const info = GATES[op.gate];
    const options =
      info.param !== null ? { params: { [info.param]: op.angle as number } } : {};
    qc.addGate(info.sdkName, column, op.qubits, options);
  });
  qc.run();

  const dim = 2 ** circuit.n;
  const amplitudes: AmplitudePair[] = Array.from({ length: dim }, () => [0, 0]);
  for (const entry of qc.stateAsArray(false)) {
    amplitudes[entry.index] = [entry.amplitude.re ?? 0, entry.amplitude.im ?? 0];
  }
  let norm = 0;
  for (const [re, im] of amplitudes) {
    norm += re * re + im * im;
  }
  if (Math.abs(norm - 1) > 1e-8) {
    throw new RequestError("bad_state", `statevector norm drifted to ${norm}`);
  }
  return amplitudes;
}
