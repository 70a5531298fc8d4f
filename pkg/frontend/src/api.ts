/** Thin typed client for the map service HTTP API. */

import type { EventPayload, ProfileData, Snapshot } from "./types";
import type { ViewState } from "./view";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchFn = typeof fetch;

export interface ClientOptions {
  token?: string;
  fetchFn?: FetchFn;
}

export class MapClient {
  private readonly base: string;
  private readonly token: string | undefined;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, options: ClientOptions = {}) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchFn = options.fetchFn ?? fetch;
  }

  async health(): Promise<{ status: string; events: number; participants: number }> {
    return this.request("GET", "/health");
  }

  async snapshot(view: ViewState): Promise<Snapshot> {
    const params = new URLSearchParams({ mode: view.mode });
    if (view.mode === "history") {
      if (view.window === null) {
        throw new Error("history mode needs a window");
      }
      params.set("start", view.window.start);
      params.set("end", view.window.end);
    }
    return this.request("GET", `/snapshot?${params}`);
  }

  async participants(): Promise<ProfileData[]> {
    const body = await this.request<{ participants: ProfileData[] }>(
      "GET",
      "/participants",
    );
    return body.participants;
  }

  async upsertParticipant(profile: Partial<ProfileData> & { id: string }): Promise<ProfileData> {
    return this.request("PUT", `/participants/${encodeURIComponent(profile.id)}`, {
      json: profile,
    });
  }

  async postEvent(event: EventPayload): Promise<{ id: string; stored: boolean }> {
    return this.request("POST", "/events", { json: event });
  }

  async putPlan(plan: unknown): Promise<unknown> {
    return this.request("PUT", "/plan", { json: plan });
  }

  async putSollMap(text: string): Promise<{ stores: number; flows: number }> {
    return this.request("PUT", "/soll-map", { text });
  }

  private async request<T>(
    method: string,
    path: string,
    body?: { json?: unknown; text?: string },
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token !== undefined) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let payload: string | undefined;
    if (body?.json !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body.json);
    } else if (body?.text !== undefined) {
      headers["Content-Type"] = "text/plain; charset=utf-8";
      payload = body.text;
    }
    const response = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers,
      body: payload,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return (await response.json()) as T;
  }
}

async function describeFailure(response: Response): Promise<string> {
  let detail = "";
  try {
    const body: unknown = await response.json();
    if (body !== null && typeof body === "object" && "detail" in body) {
      detail = JSON.stringify((body as { detail: unknown }).detail);
    } else {
      detail = JSON.stringify(body);
    }
  } catch {
    detail = response.statusText;
  }
  return `${response.status}: ${detail}`;
}
