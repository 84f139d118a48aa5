/** Request loop: never crashes on bad input, answers every line it can. */
import * as readline from "readline";

import { statevector } from "./backend";
import { parseRequest, RequestError } from "./protocol";

export function handleLine(line: string): string | null {
  if (!line.trim()) {
    return null;
  }
  let id: number | null = null;
  try {
    const request = parseRequest(line);
    id = request.id;
    return JSON.stringify({
      id,
      statevector: statevector(request.circuit),
      endianness: "little",
    });
  } catch (err) {
    const kind = err instanceof RequestError ? err.kind : "internal";
    const message = err instanceof Error ? err.message : String(err);
    return JSON.stringify({ id, error: { kind, message } });
  }
}

export function serve(input: NodeJS.ReadableStream, output: NodeJS.WritableStream): Promise<void> {
  const rl = readline.createInterface({ input, terminal: false });
  return new Promise((resolve) => {
    rl.on("line", (line) => {
      const response = handleLine(line);
      if (response !== null) {
        output.write(response + "\n");
      }
    });
    rl.on("close", resolve);
  });
}
