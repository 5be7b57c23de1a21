/**
 * Typed client for the trace driver's JSON protocol (see docs/protocol.md
 * in the repository root). One request object per POST /rpc call; the
 * response echoes the request id and carries events as
 * {chrono, kind, attributes} records.
 */

export interface TraceEvent {
  chrono: number;
  kind: string;
  attributes: Record<string, string | number>;
}

export interface FilterQueryJson {
  kinds?: string[];
  chrono_range?: [number, number];
  attr_contains?: [string, string][];
}

export type SessionStatus = 'idle' | 'paused' | 'running' | 'finished' | 'failed';

export interface StatusInfo {
  status: SessionStatus;
  events?: number;
  program?: string;
  query?: string;
  step_by_step?: boolean;
  protocol?: number;
}

export class ProtocolError extends Error {
  constructor(
    public readonly code: string,
    message: string,
  ) {
    super(`${code}: ${message}`);
  }
}

export class ProtocolClient {
  private nextId = 1;

  constructor(private readonly baseUrl: string) {}

  private async rpc<T>(request: Record<string, unknown>): Promise<T> {
    const response = await fetch(this.baseUrl.replace(/\/+$/, '') + '/rpc', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ id: this.nextId++, ...request }),
    });
    const body = (await response.json()) as { ok: boolean; error?: { code: string; message: string } };
    if (!body.ok) {
      const error = body.error ?? { code: 'Unknown', message: 'malformed error response' };
      throw new ProtocolError(error.code, error.message);
    }
    return body as T;
  }

  status(): Promise<StatusInfo> {
    return this.rpc<StatusInfo>({ op: 'status' });
  }

  load(program: string, query: string, budget?: number): Promise<{ status: SessionStatus }> {
    return this.rpc({ op: 'load', program, query, step_by_step: true, budget });
  }

  step(): Promise<{ event: TraceEvent | null; status: SessionStatus }> {
    return this.rpc({ op: 'step' });
  }

  control(cmd: 'continue' | 'pause' | 'end'): Promise<{ status: SessionStatus; events: TraceEvent[] }> {
    return this.rpc({ op: 'control', cmd });
  }

  updateFilter(analyzer: string, query: FilterQueryJson): Promise<unknown> {
    return this.rpc({ op: 'filter', analyzer, query });
  }

  fetchEvents(query: FilterQueryJson | null, range?: [number, number]): Promise<{ events: TraceEvent[] }> {
    return this.rpc({ op: 'fetch', query, range });
  }

  exportXml(): Promise<{ xml: string }> {
    return this.rpc({ op: 'export_xml' });
  }
}
