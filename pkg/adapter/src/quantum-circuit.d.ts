declare module "quantum-circuit" {
  interface StateEntry {
    index: number;
    indexBinStr: string;
    amplitude: { re?: number; im?: number };
  }
  class QuantumCircuit {
    constructor(numQubits: number);
    addGate(name: string, column: number, wires: number | number[],
            options?: { params?: Record<string, number> }): void;
    run(): void;
    stateAsArray(onlyPossible?: boolean): StateEntry[];
  }
  export = QuantumCircuit;
}
