/** Periodic snapshot refresh with at most one request in flight.
 *
 * A failed refresh keeps the previous snapshot and flips `stale`; the
 * next successful one clears it.  Ticks that would overlap a running
 * request are skipped rather than queued.
 */

import type { MapClient } from "./api";
import type { Snapshot } from "./types";
import type { ViewState } from "./view";

export interface PollStatus {
  snapshot: Snapshot | null;
  stale: boolean;
  lastRefresh: Date | null;
  error: string | null;
}

export interface Poller {
  tick(): Promise<void>;
  start(): void;
  stop(): void;
  readonly status: PollStatus;
}

export interface PollOptions {
  intervalMs?: number;
  now?: () => Date;
}

export const DEFAULT_INTERVAL_MS = 5_000;

export function createPoller(
  client: MapClient,
  getView: () => ViewState,
  onChange: (status: PollStatus) => void,
  options: PollOptions = {},
): Poller {
  const intervalMs = options.intervalMs ?? DEFAULT_INTERVAL_MS;
  const now = options.now ?? (() => new Date());
  let status: PollStatus = {
    snapshot: null,
    stale: false,
    lastRefresh: null,
    error: null,
  };
  let inFlight = false;
  let timer: ReturnType<typeof setInterval> | null = null;

  async function tick(): Promise<void> {
    if (inFlight) {
      return;
    }
    inFlight = true;
    try {
      const snapshot = await client.snapshot(getView());
      status = { snapshot, stale: false, lastRefresh: now(), error: null };
    } catch (failure) {
      status = {
        ...status,
        stale: true,
        error: failure instanceof Error ? failure.message : String(failure),
      };
    } finally {
      inFlight = false;
    }
    onChange(status);
  }

  return {
    tick,
    start(): void {
      if (timer === null) {
        void tick();
        timer = setInterval(() => void tick(), intervalMs);
      }
    },
    stop(): void {
      if (timer !== null) {
        clearInterval(timer);
        timer = null;
      }
    },
    get status(): PollStatus {
      return status;
    },
  };
}
