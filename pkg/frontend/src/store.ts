/** Single source of truth for the dashboard.
 *
 * State changes arrive from two places only: API responses and event-stream
 * frames. Views render whatever is here; nothing is computed locally and
 * nothing is shown optimistically. Applying a frame notifies subscribers
 * synchronously, so a committed state change is on screen within the frame
 * that announced it.
 */

import type { ApiClient } from "./api.js";
import type {
  AlarmEntry,
  EventFrame,
  InfraDoc,
  MetricSampleDoc,
  NsDoc,
  NsSummary,
  PlanDoc,
  PlanRequest,
} from "./types.js";

export type ViewName = "services" | "detail" | "alarms" | "planner" | "infra";

const NS_STATES = new Set([
  "PENDING",
  "DEPLOYING",
  "ACTIVE",
  "RECONFIGURING",
  "TERMINATING",
  "TERMINATED",
  "FAILED",
]);

export interface AppState {
  connected: boolean;
  banner: string | null;
  view: ViewName;
  nss: Map<string, NsSummary>;
  alarms: AlarmEntry[];
  selectedNs: string | null;
  detail: NsDoc | null;
  samples: MetricSampleDoc[];
  metricVnf: string | null;
  metricName: string;
  planPreview: PlanDoc | null;
  planError: string | null;
  infra: InfraDoc | null;
  lastAction: string | null;
}

export class Store {
  state: AppState = {
    connected: false,
    banner: "connecting...",
    view: "services",
    nss: new Map(),
    alarms: [],
    selectedNs: null,
    detail: null,
    samples: [],
    metricVnf: null,
    metricName: "cpu_load",
    planPreview: null,
    planError: null,
    infra: null,
    lastAction: null,
  };

  private listeners: (() => void)[] = [];

  constructor(public api: ApiClient) {}

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  notify(): void {
    for (const fn of this.listeners) fn();
  }

  setConnected(connected: boolean): void {
    this.state.connected = connected;
    this.state.banner = connected ? null : "connection lost - actions disabled until reconnect";
    this.notify();
  }

  setView(view: ViewName): void {
    this.state.view = view;
    this.notify();
  }

  /** Reducer for one event-stream frame. */
  applyFrame(frame: EventFrame): void {
    if (frame.entity_kind === "ns" && NS_STATES.has(frame.event)) {
      if (frame.event === "TERMINATED") {
        this.state.nss.delete(frame.entity_id);
      } else {
        const prev = this.state.nss.get(frame.entity_id);
        const name =
          typeof frame.data.name === "string" ? frame.data.name : prev?.name ?? "";
        this.state.nss.set(frame.entity_id, {
          id: frame.entity_id,
          name,
          state: frame.event,
        });
      }
    } else if (frame.entity_kind === "alarm") {
      this.state.alarms.unshift({
        alarm_id: frame.entity_id,
        vnf_id: String(frame.data.vnf_id ?? ""),
        rule_id: typeof frame.data.rule_id === "string" ? frame.data.rule_id : undefined,
        ts: frame.ts,
        kind: frame.event,
        accepted:
          typeof frame.data.accepted === "boolean" ? frame.data.accepted : undefined,
      });
      if (this.state.alarms.length > 200) this.state.alarms.pop();
    }
    this.notify();
  }

  async refreshList(): Promise<void> {
    const rows = await this.api.listNs();
    this.state.nss = new Map(rows.map((r) => [r.id, r]));
    this.notify();
  }

  async openDetail(nsId: string): Promise<void> {
    this.state.selectedNs = nsId;
    this.state.view = "detail";
    await this.refreshDetail();
  }

  async refreshDetail(): Promise<void> {
    const nsId = this.state.selectedNs;
    if (!nsId) return;
    this.state.detail = await this.api.getNs(nsId);
    const vnfs = this.state.detail.vnfs;
    if (!this.state.metricVnf || !vnfs.some((v) => v.id === this.state.metricVnf)) {
      this.state.metricVnf = vnfs.length ? vnfs[0].id : null;
    }
    if (this.state.metricVnf) {
      this.state.samples = await this.api.queryMetrics(
        this.state.metricVnf,
        this.state.metricName,
      );
    } else {
      this.state.samples = [];
    }
    this.notify();
  }

  async requestPlan(body: PlanRequest): Promise<void> {
    try {
      this.state.planPreview = await this.api.plan(body);
      this.state.planError = null;
    } catch (err) {
      this.state.planPreview = null;
      this.state.planError = String(err instanceof Error ? err.message : err);
    }
    this.notify();
  }

  async refreshInfra(): Promise<void> {
    this.state.infra = await this.api.infrastructure();
    this.notify();
  }

  /** The alarm feed only knows the VNF; the owning service is looked up
   * through the API so the operator confirms against real state. */
  async nsOfVnf(vnfId: string): Promise<string | null> {
    for (const row of await this.api.listNs()) {
      const doc = await this.api.getNs(row.id);
      if (doc.vnfs.some((v) => v.id === vnfId)) return row.id;
    }
    return null;
  }

  setAction(message: string | null): void {
    this.state.lastAction = message;
    this.notify();
  }
}
