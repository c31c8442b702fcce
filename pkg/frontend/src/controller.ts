// Submit/refit orchestration: one in-flight round-trip at a time, edits
// made meanwhile are submitted again when the current one finishes, and
// every service failure mode maps to a visible banner state.

import { ApiClient, ConflictError, PivotValidationError, ServiceUnreachableError } from "./api.js";
import { sortPivots, withReport, type UiState } from "./state.js";

export class Controller {
  private inFlight = false;

  constructor(
    private api: ApiClient,
    public state: UiState,
    private onChange: (state: UiState) => void = () => {},
  ) {}

  private update(next: UiState): UiState {
    this.state = next;
    this.onChange(next);
    return next;
  }

  /** PUT the pivot list, then POST refit; queues if one is already running. */
  async submitAndRefit(options: Record<string, unknown> = {}): Promise<UiState> {
    if (this.inFlight) {
      this.update({ ...this.state, queued: true });
      return this.state;
    }
    this.inFlight = true;
    this.update({ ...this.state, pending: true, banner: { kind: "none" } });
    try {
      do {
        this.update({ ...this.state, queued: false });
        const pivots = sortPivots(this.state.pivots); // sorted-before-submit invariant
        const revision = await this.api.putPivots(
          this.state.sessionId,
          pivots,
          this.state.revision,
        );
        this.update({ ...this.state, pivots, revision });
        const { report, revision: afterRefit } = await this.api.refit(
          this.state.sessionId,
          options,
        );
        this.update(withReport(this.state, report, afterRefit));
      } while (this.state.queued);
    } catch (error) {
      this.update({ ...this.state, banner: bannerFor(error), queued: false });
    } finally {
      this.inFlight = false;
      this.update({ ...this.state, pending: false });
    }
    return this.state;
  }

  /** After a conflict: pull the server's pivots and revision, drop local edits. */
  async reloadFromServer(): Promise<UiState> {
    const { revision, pivots } = await this.api.getPivots(this.state.sessionId);
    return this.update({
      ...this.state,
      revision,
      pivots,
      dirty: false,
      banner: { kind: "none" },
    });
  }
}

export function bannerFor(error: unknown): UiState["banner"] {
  if (error instanceof ConflictError) {
    return { kind: "conflict", serverRevision: error.currentRevision };
  }
  if (error instanceof PivotValidationError) {
    return { kind: "invalid-pivot", pivotIndex: error.pivotIndex, message: error.message };
  }
  if (error instanceof ServiceUnreachableError) {
    return { kind: "error", message: error.message, retryable: true };
  }
  return { kind: "error", message: error instanceof Error ? error.message : String(error), retryable: false };
}
