/** Hosts as utilization bars, the spectrum pool as an occupancy strip. */

import { el, replaceChildren, svgEl } from "../dom.js";
import type { Store } from "../store.js";
import type { HostDoc } from "../types.js";

function bar(label: string, free: number, total: number): HTMLElement {
  const used = total - free;
  const pct = total > 0 ? (used / total) * 100 : 0;
  return el("div", { class: "bar-row" }, [
    el("span", { class: "bar-label" }, [`${label}: ${used}/${total}`]),
    el("div", { class: "bar-track" }, [
      el("div", {
        class: "bar-fill",
        style: `width: ${pct.toFixed(1)}%`,
      }),
    ]),
  ]);
}

function hostCard(host: HostDoc): HTMLElement {
  return el("div", { class: "host-card" }, [
    el("h3", {}, [host.id]),
    bar("vcpus", host.vcpus_free, host.vcpus_total),
    bar("ram MB", host.ram_mb_free, host.ram_mb_total),
  ]);
}

export function renderInfra(container: Element, store: Store): void {
  const doc = store.state.infra;
  if (!doc) {
    replaceChildren(container, el("p", {}, ["loading..."]));
    return;
  }

  const stripW = 640;
  const strip = svgEl("svg", {
    viewBox: `0 0 ${stripW} 46`,
    width: String(stripW),
    height: "46",
    class: "spectrum",
  });
  strip.append(
    svgEl("rect", { x: "0", y: "8", width: String(stripW), height: "24", class: "spectrum-track" }),
  );
  const span = doc.pool.f_end_hz - doc.pool.f_start_hz;
  for (const s of doc.pool.slices) {
    const x = ((s.f_low_hz - doc.pool.f_start_hz) / span) * stripW;
    const w = ((s.f_high_hz - s.f_low_hz) / span) * stripW;
    strip.append(
      svgEl("rect", {
        x: x.toFixed(1),
        y: "8",
        width: Math.max(w, 1).toFixed(1),
        height: "24",
        class: "spectrum-slice",
      }),
    );
  }
  const left = svgEl("text", { x: "0", y: "44", class: "chart-label" });
  left.textContent = `${(doc.pool.f_start_hz / 1e9).toFixed(3)} GHz`;
  const right = svgEl("text", { x: String(stripW - 70), y: "44", class: "chart-label" });
  right.textContent = `${(doc.pool.f_end_hz / 1e9).toFixed(3)} GHz`;
  strip.append(left, right);

  const rrhRows = doc.vim.rrhs.map((r) =>
    el("li", {}, [`${r.id}: ${r.attached_vnf ?? "idle"}`]),
  );

  replaceChildren(
    container,
    el("h2", {}, ["Infrastructure"]),
    el("p", { class: "hint" }, [
      `clock ${doc.clock.mode} t=${doc.clock.now.toFixed(3)} s, ` +
        `${doc.vim.vm_count} VMs, ${doc.tasks_pending} tasks pending`,
    ]),
    el("div", { class: "host-grid" }, doc.vim.hosts.map(hostCard)),
    el("h3", {}, [`Spectrum pool (${doc.pool.slices.length} slices)`]),
    strip,
    el("h3", {}, ["Radio heads"]),
    doc.vim.rrhs.length ? el("ul", {}, rrhRows) : el("p", { class: "empty" }, ["none"]),
  );
}
