/** One service: VNF table plus a metric chart.
 *
 * The chart is an SVG polyline over samples returned by the query endpoint;
 * scaling to the viewport is the only arithmetic done here.
 */

import { button, el, replaceChildren, svgEl } from "../dom.js";
import type { Store } from "../store.js";
import type { MetricSampleDoc } from "../types.js";

export interface NsDetailHandlers {
  back(): void;
  pickVnf(vnfId: string): void;
  pickMetric(metric: string): void;
}

const W = 560;
const H = 180;
const PAD = 30;

function chart(samples: MetricSampleDoc[]): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    class: "chart",
    width: String(W),
    height: String(H),
  });
  svg.append(
    svgEl("rect", { x: "0", y: "0", width: String(W), height: String(H), class: "chart-bg" }),
  );
  if (samples.length === 0) return svg;

  const ts = samples.map((s) => s.ts);
  const vs = samples.map((s) => s.value);
  const t0 = Math.min(...ts);
  const t1 = Math.max(...ts);
  const v0 = Math.min(...vs);
  const v1 = Math.max(...vs);
  const sx = (t: number) => PAD + ((t - t0) / (t1 - t0 || 1)) * (W - 2 * PAD);
  const sy = (v: number) => H - PAD - ((v - v0) / (v1 - v0 || 1)) * (H - 2 * PAD);

  const line = svgEl("polyline", {
    points: samples.map((s) => `${sx(s.ts).toFixed(1)},${sy(s.value).toFixed(1)}`).join(" "),
    class: "chart-line",
    fill: "none",
  });
  svg.append(line);
  for (const s of samples) {
    svg.append(
      svgEl("circle", { cx: sx(s.ts).toFixed(1), cy: sy(s.value).toFixed(1), r: "2.5" }),
    );
  }
  const lo = svgEl("text", { x: "4", y: String(H - PAD), class: "chart-label" });
  lo.textContent = String(v0);
  const hi = svgEl("text", { x: "4", y: String(PAD), class: "chart-label" });
  hi.textContent = String(v1);
  svg.append(lo, hi);
  return svg;
}

export function renderNsDetail(
  container: Element,
  store: Store,
  handlers: NsDetailHandlers,
): void {
  const doc = store.state.detail;
  if (!doc) {
    replaceChildren(container, el("p", {}, ["loading..."]));
    return;
  }

  const vnfRows = el("tbody");
  for (const v of doc.vnfs) {
    vnfRows.append(
      el("tr", {}, [
        el("td", {}, [v.id]),
        el("td", {}, [v.name]),
        el("td", {}, [v.role]),
        el("td", { "data-field": "vnf-state" }, [v.state]),
        el("td", {}, [v.mgmt_ip ?? "-"]),
        el("td", {}, [v.dataflow_ip ?? "-"]),
      ]),
    );
  }

  const vnfSelect = el("select", { id: "metric-vnf" });
  for (const v of doc.vnfs) {
    const opt = el("option", { value: v.id }, [`${v.name} (${v.id})`]);
    if (v.id === store.state.metricVnf) opt.setAttribute("selected", "selected");
    vnfSelect.append(opt);
  }
  vnfSelect.addEventListener("change", () => handlers.pickVnf(vnfSelect.value));

  const metricInput = el("input", {
    id: "metric-name",
    value: store.state.metricName,
  });
  metricInput.addEventListener("change", () => handlers.pickMetric(metricInput.value));

  replaceChildren(
    container,
    el("div", { class: "detail-head" }, [
      button("< back", handlers.back),
      el("h2", {}, [`${doc.id}  ${doc.name}`]),
      el("span", { class: "badge", "data-field": "ns-state" }, [doc.state]),
    ]),
    el("table", { class: "grid" }, [
      el("thead", {}, [
        el("tr", {}, [
          el("th", {}, ["id"]),
          el("th", {}, ["name"]),
          el("th", {}, ["role"]),
          el("th", {}, ["state"]),
          el("th", {}, ["mgmt ip"]),
          el("th", {}, ["dataflow ip"]),
        ]),
      ]),
      vnfRows,
    ]),
    el("div", { class: "metric-controls" }, [
      el("label", {}, ["function: ", vnfSelect]),
      el("label", {}, ["metric: ", metricInput]),
    ]),
    chart(store.state.samples),
    el("p", { class: "hint" }, [
      store.state.samples.length
        ? `${store.state.samples.length} samples`
        : "no samples for this metric yet",
    ]),
  );
}
