import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { parseSseChunk } from "../src/sse.js";
import { Store } from "../src/store.js";
import type { EventFrame } from "../src/types.js";
import { renderNsList, type NsListHandlers } from "../src/views/nslist.js";

const noop: NsListHandlers = { open() {}, remove() {} };

function frame(partial: Partial<EventFrame>): EventFrame {
  return { ts: 0, entity_kind: "ns", entity_id: "ns-000001", event: "ACTIVE", data: {}, ...partial };
}

function liveList(store: Store): HTMLElement {
  const container = document.createElement("div");
  store.subscribe(() => renderNsList(container, store, noop));
  renderNsList(container, store, noop);
  return container;
}

function stateCell(container: HTMLElement, nsId: string): string {
  const cell = container.querySelector(`td[data-ns="${nsId}"]`);
  return cell ? cell.textContent ?? "" : "";
}

describe("ns list and event stream", () => {
  it("reflects DEPLOYING -> ACTIVE within the frame that announces it", () => {
    const store = new Store(new ApiClient(""));
    store.setConnected(true);
    const container = liveList(store);

    store.applyFrame(frame({ event: "DEPLOYING", data: { name: "downlink" } }));
    expect(stateCell(container, "ns-000001")).toBe("DEPLOYING");

    // a single synchronous frame application; no awaits, no extra renders
    store.applyFrame(frame({ event: "ACTIVE", data: { name: "downlink" } }));
    expect(stateCell(container, "ns-000001")).toBe("ACTIVE");
    expect(container.textContent).toContain("downlink");
  });

  it("drops a row when the service reaches TERMINATED", () => {
    const store = new Store(new ApiClient(""));
    const container = liveList(store);
    store.applyFrame(frame({ event: "ACTIVE", data: { name: "svc" } }));
    expect(stateCell(container, "ns-000001")).toBe("ACTIVE");
    store.applyFrame(frame({ event: "TERMINATED" }));
    expect(container.querySelector('td[data-ns="ns-000001"]')).toBeNull();
    expect(container.textContent).toContain("no live services");
  });

  it("ignores non-state service events and keeps the last committed state", () => {
    const store = new Store(new ApiClient(""));
    store.applyFrame(frame({ event: "ACTIVE", data: { name: "svc" } }));
    store.applyFrame(frame({ event: "ACTUATOR_NOOP" }));
    expect(store.state.nss.get("ns-000001")?.state).toBe("ACTIVE");
  });

  it("collects alarm frames into the feed, newest first", () => {
    const store = new Store(new ApiClient(""));
    store.applyFrame(frame({
      ts: 3.0, entity_kind: "alarm", entity_id: "overload", event: "FIRED",
      data: { vnf_id: "vnf-000002", rule_id: "rule-cpu" },
    }));
    store.applyFrame(frame({
      ts: 3.0, entity_kind: "alarm", entity_id: "overload", event: "DELIVERED",
      data: { vnf_id: "vnf-000002", accepted: true },
    }));
    expect(store.state.alarms.map((a) => a.kind)).toEqual(["DELIVERED", "FIRED"]);
    expect(store.state.alarms[0].accepted).toBe(true);
  });

  it("disables actions while disconnected and shows the banner", () => {
    const store = new Store(new ApiClient(""));
    const container = liveList(store);
    store.applyFrame(frame({ event: "ACTIVE", data: { name: "svc" } }));
    store.setConnected(false);
    expect(store.state.banner).toMatch(/connection lost/);
    const buttons = [...container.querySelectorAll("button")];
    expect(buttons.length).toBeGreaterThan(0);
    expect(buttons.every((b) => b.disabled)).toBe(true);
    store.setConnected(true);
    expect([...container.querySelectorAll("button")].every((b) => !b.disabled)).toBe(true);
  });
});

describe("sse parsing", () => {
  it("assembles frames across chunk boundaries and skips keep-alives", () => {
    const got: EventFrame[] = [];
    const push = (f: EventFrame) => got.push(f);
    let rest = parseSseChunk('data: {"ts": 1.0, "entity_kind": "ns", "entity_id": "a", ', push);
    expect(got).toHaveLength(0); // incomplete frame stays buffered
    rest = parseSseChunk(rest + '"event": "ACTIVE", "data": {}}\n\n: keep-alive\n\n', push);
    expect(got).toHaveLength(1);
    expect(got[0].event).toBe("ACTIVE");
    expect(rest).toBe("");
  });
});
