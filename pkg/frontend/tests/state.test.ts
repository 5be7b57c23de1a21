import { describe, expect, it } from 'vitest';

import type { TraceEvent } from '../src/protocol.js';
import {
  ViewState,
  eventSummary,
  filterFromForm,
  programLineRuleName,
  ruleNameOf,
} from '../src/state.js';

function event(chrono: number, kind: string, attributes: TraceEvent['attributes'] = {}): TraceEvent {
  return { chrono, kind, attributes };
}

describe('ruleNameOf', () => {
  it('extracts the name before the @', () => {
    expect(ruleNameOf(event(7, 'apply', { rule: 'r2@ leq(A,C), leq(C,A) ==> A=C' }))).toBe('r2');
  });

  it('is null without a rule attribute', () => {
    expect(ruleNameOf(event(1, 'initialState', { goal: '' }))).toBeNull();
  });
});

describe('programLineRuleName', () => {
  it('reads the last identifier before @', () => {
    expect(programLineRuleName('antisymmetry  r2@ leq(X,Y), leq(Y,X) <=> X=Y.')).toBe('r2');
  });

  it('handles label-only headers and plain lines', () => {
    expect(programLineRuleName('reflexivity @ leq(X,X) <=> true.')).toBe('reflexivity');
    expect(programLineRuleName('% just a comment with r9@ inside')).toBeNull();
    expect(programLineRuleName('p(X) <=> true.')).toBeNull();
  });
});

describe('ViewState', () => {
  it('keeps the selection only while the event stays displayed', () => {
    const state = new ViewState();
    state.setEvents([event(1, 'initialState'), event(2, 'introduce')]);
    state.selectedChrono = 2;
    expect(state.selectedEvent?.kind).toBe('introduce');
    state.setEvents([event(1, 'initialState')]);
    expect(state.selectedChrono).toBeNull();
  });

  it('orders events by chrono', () => {
    const state = new ViewState();
    state.setEvents([event(3, 'solve'), event(1, 'initialState'), event(2, 'introduce')]);
    expect(state.events.map((e) => e.chrono)).toEqual([1, 2, 3]);
  });

  it('highlights the latest apply, preferring the selected one', () => {
    const state = new ViewState();
    state.setEvents([
      event(4, 'apply', { rule: 'r4@ a ==> b' }),
      event(7, 'apply', { rule: 'r2@ c ==> d' }),
    ]);
    expect(state.highlightedRule).toBe('r2');
    state.selectedChrono = 4;
    expect(state.highlightedRule).toBe('r4');
  });

  it('has no highlight without apply events', () => {
    const state = new ViewState();
    state.setEvents([event(1, 'initialState', { goal: 'p' })]);
    expect(state.highlightedRule).toBeNull();
  });
});

describe('filterFromForm', () => {
  it('maps an untouched form to the match-all query', () => {
    expect(
      filterFromForm({ kinds: [], chronoLo: '', chronoHi: '', attrName: '', attrSubstring: '' }),
    ).toEqual({});
  });

  it('collects kinds, range and attribute clause', () => {
    expect(
      filterFromForm({
        kinds: ['apply'],
        chronoLo: '1',
        chronoHi: '8',
        attrName: 'rule',
        attrSubstring: 'r2',
      }),
    ).toEqual({ kinds: ['apply'], chrono_range: [1, 8], attr_contains: [['rule', 'r2']] });
  });

  it('drops a half-filled range', () => {
    expect(
      filterFromForm({ kinds: [], chronoLo: '3', chronoHi: '', attrName: '', attrSubstring: '' }),
    ).toEqual({});
  });
});

describe('eventSummary', () => {
  it('omits empty attributes and keeps a stable order', () => {
    const summary = eventSummary(
      event(7, 'apply', { rule: 'r2@ x ==> y', goal: '', udc: 'leq(C,B)', bic: 'A=C' }),
    );
    expect(summary).toBe('rule: r2@ x ==> y  udc: leq(C,B)  bic: A=C');
  });
});
