// Pure UI state and its transitions. Rendering reads this; nothing in
// here talks to the network.

import type { PivotPayload, Report } from "./types.js";

export type Banner =
  | { kind: "none" }
  | { kind: "error"; message: string; retryable: boolean }
  | { kind: "conflict"; serverRevision: number }
  | { kind: "invalid-pivot"; pivotIndex: number | null; message: string };

export interface UiState {
  sessionId: string;
  revision: number;
  dates: string[];
  deviation: number[];
  pivots: PivotPayload[];
  dirty: boolean; // local edits not yet submitted
  pending: boolean; // a submit+refit is in flight
  queued: boolean; // user asked again while pending
  report: Report | null;
  banner: Banner;
}

export function initialState(
  sessionId: string,
  revision: number,
  dates: string[],
  deviation: number[],
  pivots: PivotPayload[] = [],
): UiState {
  return {
    sessionId,
    revision,
    dates,
    deviation,
    pivots: sortPivots(pivots),
    dirty: false,
    pending: false,
    queued: false,
    report: null,
    banner: { kind: "none" },
  };
}

export function sortPivots(pivots: PivotPayload[]): PivotPayload[] {
  return [...pivots].sort((a, b) => (a.date < b.date ? -1 : a.date > b.date ? 1 : 0));
}

export type Gesture =
  | { kind: "add"; date: string; value: number }
  | { kind: "move"; index: number; date: string; value: number }
  | { kind: "delete"; index: number };

/** Apply a local edit; the pivot list stays sorted and date-unique. */
export function editPivot(state: UiState, gesture: Gesture): UiState {
  let pivots = [...state.pivots];
  switch (gesture.kind) {
    case "add": {
      pivots = pivots.filter((p) => p.date !== gesture.date);
      pivots.push({ date: gesture.date, value: gesture.value });
      break;
    }
    case "move": {
      if (gesture.index < 0 || gesture.index >= pivots.length) return state;
      pivots.splice(gesture.index, 1);
      pivots = pivots.filter((p) => p.date !== gesture.date);
      pivots.push({ date: gesture.date, value: gesture.value });
      break;
    }
    case "delete": {
      if (gesture.index < 0 || gesture.index >= pivots.length) return state;
      pivots.splice(gesture.index, 1);
      break;
    }
  }
  return { ...state, pivots: sortPivots(pivots), dirty: true, banner: { kind: "none" } };
}

export function withReport(state: UiState, report: Report, revision: number): UiState {
  return { ...state, report, revision, dirty: false, banner: { kind: "none" } };
}
