// Test harness: spawns the real backend (train a small model, serve on an
// ephemeral port) and tears it down afterwards.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type Backend = {
  base: string;
  logDir: string;
  proc: ChildProcess;
  stop: () => void;
};

const PYTHON = process.env.NEUROSEARCH_PYTHON ?? "python3";

export function pythonCli(args: string[], timeoutMs = 60_000): string {
  const result = spawnSync(PYTHON, ["-m", "neurosearch.cli", ...args], {
    encoding: "utf-8",
    timeout: timeoutMs,
  });
  if (result.status !== 0) {
    throw new Error(`cli ${args.join(" ")} failed: ${result.stderr || result.stdout}`);
  }
  return result.stdout;
}

export async function startBackend(): Promise<Backend> {
  const dir = mkdtempSync(join(tmpdir(), "neurosearch-ui-"));
  const model = join(dir, "model.txt");
  pythonCli([
    "train-sat", "--synthetic-eeg", "--eeg-windows", "12",
    "--grid", "small", "--no-tune", "--out", model,
  ], 120_000);
  const logDir = join(dir, "logs");
  const proc = spawn(
    PYTHON,
    ["-m", "neurosearch.cli", "serve", "--port", "0", "--model", model, "--log-dir", logDir],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  const base = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 30_000);
    let buffer = "";
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    proc.stderr!.on("data", () => {});
    proc.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
  });
  return { base, logDir, proc, stop: () => proc.kill("SIGTERM") };
}
