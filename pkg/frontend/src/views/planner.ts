/** What-if planning: the form posts to the plan endpoint and renders the
 * answer verbatim. Cell count, areas, times, and the layout coordinates all
 * come from the service; this view only scales coordinates into the SVG
 * viewport. Deploy and swap act on the exact previewed descriptor.
 */

import { button, el, replaceChildren, svgEl } from "../dom.js";
import type { Store } from "../store.js";
import type { PlanDoc } from "../types.js";

export interface PlannerHandlers {
  preview(): void;
  deploy(): void;
  swap(): void;
}

export interface PlannerFormValues {
  name: string;
  area: number;
  radius: number;
  bandwidth: number;
  model: string; // "" = service default
  strategy: string; // "" = none
  oldNsId: string; // "" = none
}

export function readPlannerForm(root: Element): PlannerFormValues {
  const get = (id: string) =>
    (root.querySelector(`#${id}`) as HTMLInputElement | HTMLSelectElement).value;
  return {
    name: get("plan-name") || "what-if",
    area: Number(get("plan-area")),
    radius: Number(get("plan-radius")),
    bandwidth: Number(get("plan-bandwidth")),
    model: get("plan-model"),
    strategy: get("plan-strategy"),
    oldNsId: get("plan-old-ns"),
  };
}

function layout(doc: PlanDoc, radius: number): SVGElement {
  const size = 280;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: String(size),
    height: String(size),
    class: "layout",
  });
  const xs = doc.placements.map((p) => p[0]);
  const ys = doc.placements.map((p) => p[1]);
  const span = Math.max(
    Math.max(...xs.map(Math.abs), 0),
    Math.max(...ys.map(Math.abs), 0),
  ) + radius;
  const scale = (size / 2 - 6) / (span || 1);
  const cx = (x: number) => size / 2 + x * scale;
  const cy = (y: number) => size / 2 - y * scale;
  for (const [x, y] of doc.placements) {
    svg.append(
      svgEl("circle", {
        cx: cx(x).toFixed(1),
        cy: cy(y).toFixed(1),
        r: (radius * scale).toFixed(1),
        class: "cell",
      }),
    );
    svg.append(
      svgEl("circle", { cx: cx(x).toFixed(1), cy: cy(y).toFixed(1), r: "2", class: "site" }),
    );
  }
  return svg;
}

function field(id: string, label: string, input: HTMLElement): HTMLElement {
  return el("label", { class: "field", for: id }, [label + " ", input]);
}

export function renderPlanner(
  container: Element,
  store: Store,
  handlers: PlannerHandlers,
  keep?: PlannerFormValues,
): void {
  const v = keep ?? {
    name: "what-if",
    area: 58241,
    radius: 30,
    bandwidth: 1400000,
    model: "",
    strategy: "",
    oldNsId: "",
  };
  const disabled = !store.state.connected;

  const modelSel = el("select", { id: "plan-model" });
  for (const [val, label] of [["", "service default"], ["TABLE", "TABLE"], ["LINEAR", "LINEAR"]]) {
    const opt = el("option", { value: val }, [label]);
    if (val === v.model) opt.setAttribute("selected", "selected");
    modelSel.append(opt);
  }
  const strategySel = el("select", { id: "plan-strategy" });
  for (const [val, label] of [["", "deploy only"], ["HARD", "swap HARD"], ["SOFT_HANDOVER", "swap SOFT"]]) {
    const opt = el("option", { value: val }, [label]);
    if (val === v.strategy) opt.setAttribute("selected", "selected");
    strategySel.append(opt);
  }
  const oldSel = el("select", { id: "plan-old-ns" });
  oldSel.append(el("option", { value: "" }, ["(none)"]));
  for (const ns of store.state.nss.values()) {
    const opt = el("option", { value: ns.id }, [`${ns.id} ${ns.name}`]);
    if (ns.id === v.oldNsId) opt.setAttribute("selected", "selected");
    oldSel.append(opt);
  }

  const form = el("div", { class: "plan-form" }, [
    field("plan-name", "name", el("input", { id: "plan-name", value: v.name })),
    field("plan-area", "target area m²", el("input", { id: "plan-area", value: String(v.area), type: "number" })),
    field("plan-radius", "cell radius m", el("input", { id: "plan-radius", value: String(v.radius), type: "number" })),
    field("plan-bandwidth", "bandwidth Hz", el("input", { id: "plan-bandwidth", value: String(v.bandwidth), type: "number" })),
    field("plan-model", "time model", modelSel),
    field("plan-strategy", "action", strategySel),
    field("plan-old-ns", "replace service", oldSel),
    button("preview", handlers.preview, disabled),
  ]);

  const parts: (Node | string)[] = [el("h2", {}, ["Coverage planner"]), form];

  if (store.state.planError) {
    parts.push(el("p", { class: "error" }, [store.state.planError]));
  }

  const doc = store.state.planPreview;
  if (doc) {
    const facts = el("dl", { class: "plan-facts" }, [
      el("dt", {}, ["cells"]),
      el("dd", { "data-field": "cells" }, [String(doc.n_enodebs)]),
      el("dt", {}, ["covered area"]),
      el("dd", { "data-field": "covered_area_m2" }, [doc.covered_area_m2.toFixed(2) + " m²"]),
      el("dt", {}, ["estimated setup"]),
      el("dd", { "data-field": "estimated_setup_s" }, [doc.estimated_setup_s.toFixed(2) + " s"]),
    ]);
    if (doc.swap_preview) {
      facts.append(
        el("dt", {}, ["swap downtime"]),
        el("dd", { "data-field": "downtime_s" }, [doc.swap_preview.downtime_s.toFixed(2) + " s"]),
        el("dt", {}, ["peak resource overlap"]),
        el("dd", { "data-field": "peak" }, [String(doc.swap_preview.peak_resource_overlap)]),
      );
    }
    const actions = el("div", { class: "plan-actions" }, [
      button("deploy island", handlers.deploy, disabled),
    ]);
    if (v.strategy && v.oldNsId) {
      actions.append(" ", button(`swap ${v.oldNsId}`, handlers.swap, disabled));
    }
    parts.push(
      el("div", { class: "plan-preview" }, [facts, layout(doc, v.radius), actions]),
    );
  }

  replaceChildren(container, ...parts);
}
