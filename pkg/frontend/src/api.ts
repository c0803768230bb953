/** Thin typed client for the orchestration API.
 *
 * Every mutating call carries a fresh Idempotency-Key so a nervous double
 * click or a retried request can never create two services. The UI never
 * derives numbers itself; this client is the only data source.
 */

import type {
  InfraDoc,
  MetricSampleDoc,
  NsDoc,
  NsSummary,
  PlanDoc,
  PlanRequest,
  SwapReportDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`${status}: ${detail}`);
  }
}

function newKey(): string {
  const c = globalThis.crypto as Crypto | undefined;
  if (c && typeof c.randomUUID === "function") return c.randomUUID();
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class ApiClient {
  constructor(
    public base: string,
    public token: string | null = null,
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    params?: Record<string, string | number>,
  ): Promise<T> {
    let url = this.base + path;
    if (params) {
      const q = new URLSearchParams();
      for (const [k, v] of Object.entries(params)) q.set(k, String(v));
      url += `?${q.toString()}`;
    }
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (method !== "GET") {
      headers["Content-Type"] = "application/json";
      headers["Idempotency-Key"] = newKey();
    }
    const resp = await this.fetchFn(url, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const doc = text ? JSON.parse(text) : null;
    if (resp.status >= 400) {
      const detail =
        doc && typeof doc.detail === "string" ? doc.detail : text || resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return doc as T;
  }

  listNs(): Promise<NsSummary[]> {
    return this.request("GET", "/nss");
  }

  getNs(nsId: string): Promise<NsDoc> {
    return this.request("GET", `/nss/${nsId}`);
  }

  deployNs(descriptor: Record<string, unknown>): Promise<{ id: string; state: string }> {
    return this.request("POST", "/nss", descriptor);
  }

  deleteNs(nsId: string): Promise<{ id: string; state: string }> {
    return this.request("DELETE", `/nss/${nsId}`);
  }

  patchNs(nsId: string, patch: Record<string, unknown>): Promise<NsDoc> {
    return this.request("PATCH", `/nss/${nsId}`, patch);
  }

  plan(body: PlanRequest): Promise<PlanDoc> {
    return this.request("POST", "/vwis/plan", body);
  }

  swap(
    nsId: string,
    strategy: string,
    vwi?: Record<string, unknown>,
  ): Promise<SwapReportDoc> {
    const body: Record<string, unknown> = { strategy };
    if (vwi) body.vwi = vwi;
    return this.request("POST", `/vwis/${nsId}/swap`, body);
  }

  runActuator(nsId: string, alarmId: string): Promise<{ tasks: string[] }> {
    return this.request("POST", `/nss/${nsId}/actuators/${alarmId}/run`, {});
  }

  queryMetrics(
    vnfId: string,
    metric: string,
    start = 0,
    end = 1e12,
  ): Promise<MetricSampleDoc[]> {
    return this.request("GET", "/metrics/query", undefined, {
      vnf_id: vnfId,
      metric,
      start,
      end,
    });
  }

  infrastructure(): Promise<InfraDoc> {
    return this.request("GET", "/infrastructure");
  }
}
