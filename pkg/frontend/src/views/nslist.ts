import { button, el, replaceChildren } from "../dom.js";
import type { Store } from "../store.js";

export interface NsListHandlers {
  open(nsId: string): void;
  remove(nsId: string): void;
}

const STATE_CLASS: Record<string, string> = {
  ACTIVE: "state-ok",
  FAILED: "state-bad",
  TERMINATING: "state-warn",
  RECONFIGURING: "state-warn",
  DEPLOYING: "state-warn",
  PENDING: "state-warn",
};

export function renderNsList(
  container: Element,
  store: Store,
  handlers: NsListHandlers,
): void {
  const rows = [...store.state.nss.values()].sort((a, b) =>
    a.id.localeCompare(b.id),
  );
  const disabled = !store.state.connected;

  const body = el("tbody");
  for (const ns of rows) {
    const stateCell = el(
      "td",
      { class: STATE_CLASS[ns.state] ?? "", "data-ns": ns.id, "data-field": "state" },
      [ns.state],
    );
    body.append(
      el("tr", {}, [
        el("td", {}, [ns.id]),
        el("td", {}, [ns.name]),
        stateCell,
        el("td", {}, [
          button("open", () => handlers.open(ns.id), disabled),
          " ",
          button("delete", () => handlers.remove(ns.id), disabled),
        ]),
      ]),
    );
  }

  replaceChildren(
    container,
    el("h2", {}, ["Network services"]),
    rows.length
      ? el("table", { class: "grid" }, [
          el("thead", {}, [
            el("tr", {}, [
              el("th", {}, ["id"]),
              el("th", {}, ["name"]),
              el("th", {}, ["state"]),
              el("th", {}, [""]),
            ]),
          ]),
          body,
        ])
      : el("p", { class: "empty" }, ["no live services"]),
  );
}
