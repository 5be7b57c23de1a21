/**
 * Trace Studio: the two-pane analyzer over the driver protocol.
 *
 * The Program View shows the loaded source and focuses the rule fired by
 * the relevant apply event; the Trace View shows the event list for the
 * active filter, with stepping controls. The table is never populated
 * locally: after every mutation it re-renders from a driver fetch, so what
 * is displayed is by construction the driver's answer for the active
 * query.
 */

import { ProtocolClient, ProtocolError } from './protocol.js';
import type { FilterQueryJson, TraceEvent } from './protocol.js';
import {
  EVENT_KINDS,
  ViewState,
  eventSummary,
  filterFromForm,
  programLineRuleName,
} from './state.js';

const ANALYZER_ID = 'trace-studio';

export class TraceStudio {
  readonly state = new ViewState();
  private client: ProtocolClient | null = null;

  constructor(private readonly root: HTMLElement) {
    this.root.innerHTML = TEMPLATE;
    this.bind();
    this.render();
  }

  private element<T extends HTMLElement>(selector: string): T {
    const found = this.root.querySelector(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found as T;
  }

  private bind(): void {
    this.element('#connect-btn').addEventListener('click', () => void this.connect());
    this.element('#load-btn').addEventListener('click', () => void this.loadProgram());
    this.element('#step-btn').addEventListener('click', () => void this.step());
    this.element('#continue-btn').addEventListener('click', () => void this.control('continue'));
    this.element('#pause-btn').addEventListener('click', () => void this.control('pause'));
    this.element('#end-btn').addEventListener('click', () => void this.control('end'));
    this.element('#export-btn').addEventListener('click', () => void this.exportXml());
    this.element('#filter-apply-btn').addEventListener('click', () => void this.applyFilterForm());
    this.element('#filter-clear-btn').addEventListener('click', () => void this.clearFilter());
  }

  // -- protocol-driven actions ----------------------------------------------

  async connect(url?: string): Promise<void> {
    const input = this.element<HTMLInputElement>('#server-url');
    if (url) input.value = url;
    this.state.serverUrl = input.value;
    this.state.connection = 'connecting';
    this.state.lastError = null;
    this.render();
    const client = new ProtocolClient(this.state.serverUrl);
    try {
      const info = await client.status();
      this.client = client;
      this.state.connection = 'connected';
      this.state.status = info.status;
      if (info.program !== undefined && info.status !== 'idle') {
        // reconnect into a live session: restore text and refetch the list
        this.state.programText = info.program;
        this.state.queryText = info.query ?? '';
        this.element<HTMLTextAreaElement>('#program-input').value = info.program;
        this.element<HTMLInputElement>('#query-input').value = info.query ?? '';
        await this.refresh();
        return;
      }
    } catch (error) {
      this.client = null;
      this.state.connection = 'disconnected';
      this.state.lastError = describe(error);
    }
    this.render();
  }

  async loadProgram(): Promise<void> {
    if (!this.client) return;
    this.state.programText = this.element<HTMLTextAreaElement>('#program-input').value;
    this.state.queryText = this.element<HTMLInputElement>('#query-input').value;
    try {
      const response = await this.client.load(this.state.programText, this.state.queryText);
      this.state.status = response.status;
      this.state.selectedChrono = null;
      this.state.lastExportedXml = null;
      this.state.lastError = null;
      await this.client.updateFilter(ANALYZER_ID, this.state.filter);
      await this.refresh();
    } catch (error) {
      this.state.lastError = describe(error);
      this.render();
    }
  }

  async step(): Promise<void> {
    if (!this.client) return;
    try {
      const response = await this.client.step();
      this.state.status = response.status;
      await this.refresh();
    } catch (error) {
      this.state.lastError = describe(error);
      this.render();
    }
  }

  async control(cmd: 'continue' | 'pause' | 'end'): Promise<void> {
    if (!this.client) return;
    try {
      const response = await this.client.control(cmd);
      this.state.status = response.status;
      await this.refresh();
    } catch (error) {
      this.state.lastError = describe(error);
      this.render();
    }
  }

  async applyFilterForm(): Promise<void> {
    const kinds = Array.from(
      this.root.querySelectorAll<HTMLInputElement>('input[name="kind"]:checked'),
    ).map((box) => box.value);
    this.state.filter = filterFromForm({
      kinds,
      chronoLo: this.element<HTMLInputElement>('#filter-lo').value,
      chronoHi: this.element<HTMLInputElement>('#filter-hi').value,
      attrName: this.element<HTMLInputElement>('#filter-attr-name').value.trim(),
      attrSubstring: this.element<HTMLInputElement>('#filter-attr-sub').value,
    });
    await this.pushFilter();
  }

  async clearFilter(): Promise<void> {
    this.state.filter = {};
    for (const box of this.root.querySelectorAll<HTMLInputElement>('input[name="kind"]')) {
      box.checked = false;
    }
    for (const id of ['#filter-lo', '#filter-hi', '#filter-attr-name', '#filter-attr-sub']) {
      this.element<HTMLInputElement>(id).value = '';
    }
    await this.pushFilter();
  }

  private async pushFilter(): Promise<void> {
    if (!this.client) return;
    try {
      if (this.state.sessionActive) {
        await this.client.updateFilter(ANALYZER_ID, this.state.filter);
      }
      await this.refresh();
    } catch (error) {
      this.state.lastError = describe(error);
      this.render();
    }
  }

  async exportXml(): Promise<void> {
    if (!this.client) return;
    try {
      const response = await this.client.exportXml();
      this.state.lastExportedXml = response.xml;
      download('trace.chrv.xml', response.xml);
    } catch (error) {
      this.state.lastError = describe(error);
    }
    this.render();
  }

  selectRow(chrono: number): void {
    this.state.selectedChrono = chrono;
    this.render();
  }

  /** Re-render the Trace View from the driver's answer for the active query. */
  async refresh(): Promise<void> {
    if (!this.client) return;
    if (!this.state.sessionActive) {
      this.state.setEvents([]);
      this.render();
      return;
    }
    const response = await this.client.fetchEvents(this.state.filterIsEmpty ? null : this.state.filter);
    this.state.setEvents(response.events);
    this.render();
  }

  // -- rendering --------------------------------------------------------------

  render(): void {
    this.renderStatus();
    this.renderProgram();
    this.renderTable();
    this.renderDetail();
    this.renderControls();
  }

  private renderStatus(): void {
    this.element('#status-badge').textContent =
      this.state.connection === 'connected' ? this.state.status : this.state.connection;
    const banner = this.element('#error-banner');
    banner.textContent = this.state.lastError ?? '';
    banner.classList.toggle('hidden', this.state.lastError === null);
  }

  private renderProgram(): void {
    const view = this.element('#program-view');
    view.textContent = '';
    const highlighted = this.state.highlightedRule;
    for (const line of this.state.programText.split('\n')) {
      const span = document.createElement('span');
      span.className = 'program-line';
      const name = programLineRuleName(line);
      if (name) span.dataset['ruleName'] = name;
      if (name && name === highlighted) span.classList.add('highlighted');
      span.textContent = line;
      view.appendChild(span);
      view.appendChild(document.createTextNode('\n'));
    }
  }

  private renderTable(): void {
    const body = this.element<HTMLTableSectionElement>('#trace-table tbody');
    body.textContent = '';
    for (const event of this.state.events) {
      const row = document.createElement('tr');
      row.className = 'trace-row';
      row.dataset['chrono'] = String(event.chrono);
      if (event.chrono === this.state.selectedChrono) row.classList.add('selected');
      row.addEventListener('click', () => this.selectRow(event.chrono));
      for (const text of [String(event.chrono), event.kind, eventSummary(event)]) {
        const cell = document.createElement('td');
        cell.textContent = text;
        row.appendChild(cell);
      }
      body.appendChild(row);
    }
  }

  private renderDetail(): void {
    const detail = this.element('#event-detail');
    detail.textContent = '';
    const event = this.state.selectedEvent;
    if (!event) return;
    const list = document.createElement('dl');
    for (const [name, value] of Object.entries(event.attributes)) {
      const term = document.createElement('dt');
      term.textContent = name;
      const definition = document.createElement('dd');
      definition.textContent = String(value);
      list.appendChild(term);
      list.appendChild(definition);
    }
    detail.appendChild(list);
  }

  private renderControls(): void {
    const connected = this.state.connection === 'connected';
    const active = this.state.sessionActive;
    const stepping = active && (this.state.status === 'paused' || this.state.status === 'running');
    this.element<HTMLButtonElement>('#load-btn').disabled = !connected;
    this.element<HTMLButtonElement>('#step-btn').disabled = !stepping;
    this.element<HTMLButtonElement>('#continue-btn').disabled = !stepping;
    this.element<HTMLButtonElement>('#pause-btn').disabled = !stepping;
    this.element<HTMLButtonElement>('#end-btn').disabled = !stepping;
    this.element<HTMLButtonElement>('#export-btn').disabled = !active;
  }
}

function describe(error: unknown): string {
  if (error instanceof ProtocolError) return error.message;
  if (error instanceof Error) return `connection failed: ${error.message}`;
  return String(error);
}

function download(filename: string, text: string): void {
  if (typeof URL.createObjectURL !== 'function') return; // non-browser host
  const blob = new Blob([text], { type: 'application/xml' });
  const anchor = document.createElement('a');
  anchor.href = URL.createObjectURL(blob);
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

const TEMPLATE = `
<header>
  <h1>Trace Studio</h1>
  <span id="status-badge"></span>
  <input id="server-url" type="text" value="http://127.0.0.1:8737" size="28" />
  <button id="connect-btn">Connect</button>
</header>
<div id="error-banner" class="hidden"></div>
<main>
  <section id="program-pane">
    <h2>Program View</h2>
    <textarea id="program-input" rows="8" spellcheck="false"></textarea>
    <input id="query-input" type="text" placeholder="query, e.g. leq(A,B), leq(B,C), leq(C,A)" />
    <button id="load-btn">Load</button>
    <pre id="program-view"></pre>
  </section>
  <section id="trace-pane">
    <h2>Trace View</h2>
    <div id="controls">
      <button id="step-btn">Step</button>
      <button id="continue-btn">Continue</button>
      <button id="pause-btn">Pause</button>
      <button id="end-btn">End</button>
      <button id="export-btn">Export XML</button>
    </div>
    <fieldset id="filter-form">
      <legend>Filter</legend>
      <span id="kind-boxes">
        ${EVENT_KINDS.map(
          (kind) => `<label><input type="checkbox" name="kind" value="${kind}" />${kind}</label>`,
        ).join('\n        ')}
      </span>
      <label>chrono <input id="filter-lo" size="3" /> .. <input id="filter-hi" size="3" /></label>
      <label>attribute <input id="filter-attr-name" size="6" placeholder="rule" />
        contains <input id="filter-attr-sub" size="8" /></label>
      <button id="filter-apply-btn">Apply</button>
      <button id="filter-clear-btn">Clear</button>
    </fieldset>
    <table id="trace-table">
      <thead><tr><th>chrono</th><th>kind</th><th>attributes</th></tr></thead>
      <tbody></tbody>
    </table>
    <div id="event-detail"></div>
  </section>
</main>
`;
