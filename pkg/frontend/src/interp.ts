// Client-side piecewise-linear preview of the correction term.
//
// This duplicates the server's interpolation rule (straight lines between
// consecutive pivots, constant beyond the first/last) purely so dragging
// feels live; displayed numbers stay server-authoritative and the overlay
// is labeled a preview until refit returns.

import type { PivotPayload } from "./types.js";

const MS_PER_DAY = 86_400_000;

export function dayNumber(isoDate: string): number {
  const t = Date.parse(`${isoDate}T00:00:00Z`);
  if (Number.isNaN(t)) throw new Error(`bad date: ${isoDate}`);
  return Math.round(t / MS_PER_DAY);
}

/** Correction value at one date for a date-sorted pivot list. */
export function correctionAt(pivots: PivotPayload[], isoDate: string): number {
  if (pivots.length === 0) throw new Error("no pivots");
  const x = dayNumber(isoDate);
  const xs = pivots.map((p) => dayNumber(p.date));
  if (x <= xs[0]) return pivots[0].value;
  if (x >= xs[xs.length - 1]) return pivots[pivots.length - 1].value;
  let i = 0;
  while (xs[i + 1] < x) i++;
  const span = xs[i + 1] - xs[i];
  const t = span === 0 ? 0 : (x - xs[i]) / span;
  return pivots[i].value + t * (pivots[i + 1].value - pivots[i].value);
}

/** Correction series over a date grid (the preview polyline's y-values). */
export function correctionSeries(pivots: PivotPayload[], dates: string[]): number[] {
  return dates.map((d) => correctionAt(pivots, d));
}
