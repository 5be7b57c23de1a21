/**
 * View state and the pure helpers behind the two panes. Keeping these free
 * of DOM access makes the invariants unit-testable: the event list always
 * mirrors the driver's filtered fetch result, the selection always points
 * at a displayed event, and the highlighted rule is derived from the
 * selected or latest apply event.
 */

import type { FilterQueryJson, SessionStatus, TraceEvent } from './protocol.js';

export type ConnectionState = 'disconnected' | 'connecting' | 'connected';

export const EVENT_KINDS = ['initialState', 'introduce', 'solve', 'apply', 'fail'] as const;

/** "r2@ leq(A,C), leq(C,A) ==> A=C" -> "r2" */
export function ruleNameOf(event: TraceEvent): string | null {
  const rule = event.attributes['rule'];
  if (typeof rule !== 'string') return null;
  const at = rule.indexOf('@');
  return at > 0 ? rule.slice(0, at).trim() : null;
}

/** Rule name declared on one program source line, if any. */
export function programLineRuleName(line: string): string | null {
  const source = line.split('%')[0] ?? '';
  const match = source.match(/([A-Za-z_][A-Za-z0-9_]*)\s*@/);
  return match ? (match[1] ?? null) : null;
}

export class ViewState {
  connection: ConnectionState = 'disconnected';
  serverUrl = '';
  programText = '';
  queryText = '';
  status: SessionStatus = 'idle';
  events: TraceEvent[] = [];
  selectedChrono: number | null = null;
  filter: FilterQueryJson = {};
  lastError: string | null = null;
  lastExportedXml: string | null = null;

  /** Replace the displayed list; drops a selection that is no longer shown. */
  setEvents(events: TraceEvent[]): void {
    this.events = [...events].sort((a, b) => a.chrono - b.chrono);
    if (this.selectedChrono !== null && !this.events.some((e) => e.chrono === this.selectedChrono)) {
      this.selectedChrono = null;
    }
  }

  get selectedEvent(): TraceEvent | null {
    return this.events.find((e) => e.chrono === this.selectedChrono) ?? null;
  }

  get latestApply(): TraceEvent | null {
    for (let i = this.events.length - 1; i >= 0; i--) {
      const event = this.events[i];
      if (event && event.kind === 'apply') return event;
    }
    return null;
  }

  /** The rule the Program View should focus: the selected apply event's, otherwise the latest one's. */
  get highlightedRule(): string | null {
    const selected = this.selectedEvent;
    if (selected && selected.kind === 'apply') return ruleNameOf(selected);
    const latest = this.latestApply;
    return latest ? ruleNameOf(latest) : null;
  }

  get sessionActive(): boolean {
    return this.connection === 'connected' && this.status !== 'idle';
  }

  get filterIsEmpty(): boolean {
    return (
      this.filter.kinds === undefined &&
      this.filter.chrono_range === undefined &&
      (this.filter.attr_contains === undefined || this.filter.attr_contains.length === 0)
    );
  }
}

export interface FilterFormValues {
  kinds: string[];
  chronoLo: string;
  chronoHi: string;
  attrName: string;
  attrSubstring: string;
}

/**
 * Form-to-query mapping. No kind checked means "all kinds" (the protocol's
 * empty kind set would match nothing, which is never what a form user
 * wants); a range needs both bounds; the attribute clause needs both
 * fields.
 */
export function filterFromForm(values: FilterFormValues): FilterQueryJson {
  const query: FilterQueryJson = {};
  if (values.kinds.length > 0) {
    query.kinds = [...values.kinds];
  }
  const lo = parseInt(values.chronoLo, 10);
  const hi = parseInt(values.chronoHi, 10);
  if (!Number.isNaN(lo) && !Number.isNaN(hi)) {
    query.chrono_range = [lo, hi];
  }
  if (values.attrName && values.attrSubstring) {
    query.attr_contains = [[values.attrName, values.attrSubstring]];
  }
  return query;
}

/** Compact one-line summary of an event for the trace table. */
export function eventSummary(event: TraceEvent): string {
  const order = ['rule', 'udc', 'bic', 'goal', 'hind'];
  const parts: string[] = [];
  for (const name of order) {
    const value = event.attributes[name];
    if (value === undefined || value === '') continue;
    parts.push(`${name}: ${value}`);
  }
  return parts.join('  ');
}
