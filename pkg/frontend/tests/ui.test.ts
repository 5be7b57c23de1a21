// @vitest-environment jsdom
/**
 * Scripted browser conformance test: drives the real driver process over
 * HTTP exactly like a user clicking through the panes.
 */
import { ChildProcess, spawn } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { TraceStudio } from '../src/app.js';

const LEQ_SOURCE = `reflexivity   r1@ leq(X,Y) <=> X=Y | true.
antisymmetry  r2@ leq(X,Y), leq(Y,X) <=> X=Y.
idempotence   r3@ leq(X,Y) \\ leq(X,Y) <=> true.
transitivity  r4@ leq(X,Y), leq(Y,Z) ==> leq(X,Z).`;
const LEQ_QUERY = 'leq(A,B), leq(B,C), leq(C,A)';

let server: ChildProcess;
let serverUrl = '';

beforeAll(async () => {
  server = spawn('python3', ['-m', 'chrv', 'serve', '--port', '0'], {
    stdio: ['ignore', 'ignore', 'pipe'],
  });
  serverUrl = await new Promise<string>((resolve, reject) => {
    let buffered = '';
    const timer = setTimeout(() => reject(new Error(`driver did not start: ${buffered}`)), 15_000);
    server.stderr!.on('data', (chunk: Buffer) => {
      buffered += chunk.toString();
      const match = buffered.match(/http protocol on (http:\/\/[^/\s]+)\/rpc/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]!);
      }
    });
    server.on('exit', (code) => reject(new Error(`driver exited early with ${code}`)));
  });
}, 20_000);

afterAll(() => {
  server?.kill();
});

function makeStudio(): TraceStudio {
  document.body.innerHTML = '<div id="app"></div>';
  return new TraceStudio(document.getElementById('app')!);
}

function rows(): HTMLTableRowElement[] {
  return Array.from(document.querySelectorAll<HTMLTableRowElement>('#trace-table tbody tr'));
}

function highlightedRules(): string[] {
  return Array.from(document.querySelectorAll<HTMLElement>('.program-line.highlighted')).map(
    (line) => line.dataset['ruleName'] ?? '',
  );
}

async function connectAndLoad(studio: TraceStudio): Promise<void> {
  await studio.connect(serverUrl);
  expect(studio.state.connection).toBe('connected');
  (document.getElementById('program-input') as HTMLTextAreaElement).value = LEQ_SOURCE;
  (document.getElementById('query-input') as HTMLInputElement).value = LEQ_QUERY;
  await studio.loadProgram();
  expect(studio.state.status).toBe('paused');
}

describe('trace studio against the live driver', () => {
  it('steps through the reference run, highlights r2, filters to applies', async () => {
    const studio = makeStudio();
    await connectAndLoad(studio);

    for (let i = 1; i <= 6; i++) {
      await studio.step();
      expect(rows().length).toBe(i);
    }
    expect(highlightedRules()).toEqual(['r4']);

    await studio.step(); // chrono 7: antisymmetry fires
    expect(rows().length).toBe(7);
    expect(highlightedRules()).toEqual(['r2']);

    await studio.step(); // chrono 8: antisymmetry fires again
    expect(rows().length).toBe(8);
    expect(highlightedRules()).toEqual(['r2']);

    // quiescence: stepping adds no row
    await studio.step();
    expect(rows().length).toBe(8);
    expect(studio.state.status).toBe('finished');

    // filter kinds={apply} reduces the table to the three apply events
    const applyBox = document.querySelector<HTMLInputElement>('input[name="kind"][value="apply"]')!;
    applyBox.checked = true;
    await studio.applyFilterForm();
    expect(rows().map((row) => row.dataset['chrono'])).toEqual(['4', '7', '8']);

    // clearing restores the full trace
    await studio.clearFilter();
    expect(rows().length).toBe(8);
  }, 20_000);

  it('selecting a row shows exactly that event, and the list matches a fetch', async () => {
    const studio = makeStudio();
    await connectAndLoad(studio);
    await studio.control('continue');
    expect(studio.state.status).toBe('finished');
    expect(rows().length).toBe(8);

    rows()[6]!.click();
    const detail = document.getElementById('event-detail')!;
    const names = Array.from(detail.querySelectorAll('dt')).map((dt) => dt.textContent);
    expect(names).toEqual(['rule', 'goal', 'udc', 'bic']);
    const values = Array.from(detail.querySelectorAll('dd')).map((dd) => dd.textContent);
    expect(values[0]).toContain('r2@');
    expect(values[3]).toBe('A=C');

    // the displayed list equals the driver's unfiltered fetch result
    const response = await fetch(`${serverUrl}/rpc`, {
      method: 'POST',
      body: JSON.stringify({ op: 'fetch' }),
      headers: { 'Content-Type': 'application/json' },
    });
    const body = await response.json();
    expect(rows().map((row) => Number(row.dataset['chrono']))).toEqual(
      body.events.map((e: { chrono: number }) => e.chrono),
    );
  }, 20_000);

  it('ends a session early and exports a partial trace', async () => {
    const studio = makeStudio();
    await connectAndLoad(studio);
    await studio.step();
    await studio.step();
    await studio.control('end');
    expect(studio.state.status).toBe('finished');
    await studio.exportXml();
    expect(studio.state.lastExportedXml).toContain('<chrv');
    expect(studio.state.lastExportedXml).toContain('chrono="2"');
    expect(studio.state.lastExportedXml).not.toContain('chrono="3"');
  }, 20_000);

  it('attribute filter finds the antisymmetry firings', async () => {
    const studio = makeStudio();
    await connectAndLoad(studio);
    await studio.control('continue');
    (document.getElementById('filter-attr-name') as HTMLInputElement).value = 'bic';
    (document.getElementById('filter-attr-sub') as HTMLInputElement).value = 'A=C';
    await studio.applyFilterForm();
    expect(rows().map((row) => row.dataset['chrono'])).toEqual(['7', '8']);
  }, 20_000);

  it('shows an error banner when the driver is unreachable', async () => {
    const studio = makeStudio();
    await studio.connect('http://127.0.0.1:9');
    expect(studio.state.connection).toBe('disconnected');
    const banner = document.getElementById('error-banner')!;
    expect(banner.classList.contains('hidden')).toBe(false);
    expect(banner.textContent).not.toBe('');
  }, 20_000);

  it('reconnects into a live session and refetches the trace', async () => {
    const first = makeStudio();
    await connectAndLoad(first);
    await first.control('continue');

    const second = makeStudio();
    await second.connect(serverUrl);
    expect(second.state.status).toBe('finished');
    expect(second.state.programText).toContain('antisymmetry');
    expect(rows().length).toBe(8);
  }, 20_000);
});
