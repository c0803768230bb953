/** Dashboard bootstrap: one store, one event-stream subscription, five views.
 *
 * Mutations all follow the same shape: explicit confirm dialog first, then
 * the API call (which attaches an idempotency key), then a refresh of the
 * affected state. Nothing renders until the service confirms it.
 */

import { ApiClient, ApiError } from "./api.js";
import { el, replaceChildren } from "./dom.js";
import { openEventStream, type StreamHandle } from "./sse.js";
import { Store, type ViewName } from "./store.js";
import { renderAlarms } from "./views/alarms.js";
import { renderInfra } from "./views/infra.js";
import { renderNsDetail } from "./views/nsdetail.js";
import { renderNsList } from "./views/nslist.js";
import { readPlannerForm, renderPlanner, type PlannerFormValues } from "./views/planner.js";

const TABS: [ViewName, string][] = [
  ["services", "Services"],
  ["alarms", "Alarms"],
  ["planner", "Planner"],
  ["infra", "Infrastructure"],
];

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err instanceof Error ? err.message : err);
}

export interface AppOptions {
  api?: ApiClient;
  confirmAction?: (message: string) => boolean;
  stream?: (
    onFrame: (frame: import("./types.js").EventFrame) => void,
    onStatus: (connected: boolean) => void,
  ) => StreamHandle;
  pollMs?: number;
}

export interface AppHandle {
  store: Store;
  stop(): void;
}

export function startApp(root: Element, opts: AppOptions = {}): AppHandle {
  const params = new URLSearchParams(location.search);
  const api =
    opts.api ?? new ApiClient(params.get("api") ?? "", params.get("token"));
  const store = new Store(api);
  const confirmAction = opts.confirmAction ?? ((m: string) => window.confirm(m));

  let plannerForm: PlannerFormValues | undefined;

  const bannerEl = el("div", { class: "banner", id: "banner" });
  const actionEl = el("div", { class: "action-note", id: "action-note" });
  const nav = el("nav", { class: "tabs" });
  const viewEl = el("main", { id: "view" });
  replaceChildren(root, bannerEl, nav, actionEl, viewEl);

  const guarded = (work: () => Promise<void>) => {
    void work().catch((err) => store.setAction(`failed: ${describe(err)}`));
  };

  const handlers = {
    open: (nsId: string) => guarded(() => store.openDetail(nsId)),
    remove: (nsId: string) =>
      guarded(async () => {
        if (!confirmAction(`Tear down ${nsId}? Its VMs and spectrum are released.`)) return;
        const out = await api.deleteNs(nsId);
        store.setAction(`${out.id} -> ${out.state}`);
      }),
    back: () => store.setView("services"),
    pickVnf: (vnfId: string) =>
      guarded(async () => {
        store.state.metricVnf = vnfId;
        await store.refreshDetail();
      }),
    pickMetric: (metric: string) =>
      guarded(async () => {
        store.state.metricName = metric;
        await store.refreshDetail();
      }),
    runActuator: (alarmId: string, vnfId: string) =>
      guarded(async () => {
        const nsId = await store.nsOfVnf(vnfId);
        if (!nsId) {
          store.setAction(`no live service owns ${vnfId}`);
          return;
        }
        if (!confirmAction(`Run the actuator bound to alarm "${alarmId}" on ${nsId}?`)) return;
        const out = await api.runActuator(nsId, alarmId);
        store.setAction(`actuator queued: ${out.tasks.join(", ") || "no tasks"}`);
      }),
    preview: () =>
      guarded(async () => {
        plannerForm = readPlannerForm(viewEl);
        const body = {
          name: plannerForm.name,
          target_area_m2: plannerForm.area,
          cell_radius_m: plannerForm.radius,
          channel_bandwidth_hz: plannerForm.bandwidth,
          ...(plannerForm.model ? { time_model: { mode: plannerForm.model } } : {}),
          ...(plannerForm.strategy ? { strategy: plannerForm.strategy } : {}),
          ...(plannerForm.oldNsId ? { old_ns_id: plannerForm.oldNsId } : {}),
        };
        await store.requestPlan(body);
      }),
    deploy: () =>
      guarded(async () => {
        const doc = store.state.planPreview;
        if (!doc || !plannerForm) return;
        if (!confirmAction(`Deploy "${plannerForm.name}" with ${doc.n_enodebs} cells?`)) return;
        const out = await api.deployNs(doc.descriptor);
        store.setAction(`${out.id} -> ${out.state}`);
        await store.refreshList();
      }),
    swap: () =>
      guarded(async () => {
        const doc = store.state.planPreview;
        if (!doc || !plannerForm || !plannerForm.strategy || !plannerForm.oldNsId) return;
        const down = doc.swap_preview
          ? `${doc.swap_preview.downtime_s.toFixed(2)} s downtime`
          : "unknown downtime";
        if (
          !confirmAction(
            `Swap ${plannerForm.oldNsId} for "${plannerForm.name}" (${plannerForm.strategy}, ${down})?`,
          )
        )
          return;
        const report = await api.swap(plannerForm.oldNsId, plannerForm.strategy, {
          name: plannerForm.name,
          target_area_m2: plannerForm.area,
          cell_radius_m: plannerForm.radius,
          channel_bandwidth_hz: plannerForm.bandwidth,
        });
        store.setAction(
          `swapped ${report.old_ns_id} -> ${report.new_ns_id}, downtime ${report.downtime_s.toFixed(3)} s`,
        );
        await store.refreshList();
      }),
  };

  const render = () => {
    bannerEl.textContent = store.state.banner ?? "";
    bannerEl.className = store.state.banner ? "banner banner-on" : "banner";
    actionEl.textContent = store.state.lastAction ?? "";

    replaceChildren(
      nav,
      ...TABS.map(([view, label]) => {
        const b = el("button", { class: store.state.view === view ? "tab tab-on" : "tab" }, [
          label,
        ]);
        b.addEventListener("click", () => {
          store.setView(view);
          if (view === "infra") guarded(() => store.refreshInfra());
          if (view === "services") guarded(() => store.refreshList());
        });
        return b;
      }),
    );

    switch (store.state.view) {
      case "services":
        renderNsList(viewEl, store, handlers);
        break;
      case "detail":
        renderNsDetail(viewEl, store, handlers);
        break;
      case "alarms":
        renderAlarms(viewEl, store, handlers);
        break;
      case "planner":
        renderPlanner(viewEl, store, handlers, plannerForm);
        break;
      case "infra":
        renderInfra(viewEl, store);
        break;
    }
  };

  store.subscribe(render);
  render();

  const stream = (
    opts.stream ??
    ((onFrame, onStatus) =>
      openEventStream(`${api.base}/events?replay=100`, api.token, onFrame, onStatus))
  )(
    (frame) => store.applyFrame(frame),
    (connected) => {
      store.setConnected(connected);
      if (connected) guarded(() => store.refreshList());
    },
  );

  const pollMs = opts.pollMs ?? 3000;
  const timer = pollMs
    ? setInterval(() => {
        if (!store.state.connected) return;
        if (store.state.view === "detail") guarded(() => store.refreshDetail());
        if (store.state.view === "infra") guarded(() => store.refreshInfra());
      }, pollMs)
    : null;

  guarded(() => store.refreshList());

  return {
    store,
    stop() {
      if (timer) clearInterval(timer);
      stream.close();
    },
  };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app") as Element);
}
