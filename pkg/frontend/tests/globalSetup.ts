// Spawns a real gateway for the test run and provides its base URL.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import type { TestProject } from 'vitest/node';

const PORT = 8931;

declare module 'vitest' {
  interface ProvidedContext {
    gatewayUrl: string;
  }
}

let gateway: ChildProcess;

export async function setup(project: TestProject): Promise<void> {
  const dataDir = mkdtempSync(join(tmpdir(), 'qfi-ui-'));
  const baseUrl = `http://127.0.0.1:${PORT}`;
  gateway = spawn(
    'python3',
    ['-m', 'qfi.cli', 'serve', '--addr', `127.0.0.1:${PORT}`, '--data-dir', dataDir],
    { stdio: 'ignore' },
  );

  for (let attempt = 0; attempt < 150; attempt += 1) {
    try {
      const response = await fetch(`${baseUrl}/api/vulnerability`);
      if (response.ok) {
        project.provide('gatewayUrl', baseUrl);
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  gateway.kill();
  throw new Error('gateway did not become ready');
}

export function teardown(): void {
  gateway?.kill();
}
