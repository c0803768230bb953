import { button, el, replaceChildren } from "../dom.js";
import type { Store } from "../store.js";

export interface AlarmHandlers {
  runActuator(alarmId: string, vnfId: string): void;
}

export function renderAlarms(
  container: Element,
  store: Store,
  handlers: AlarmHandlers,
): void {
  const disabled = !store.state.connected;
  const body = el("tbody");
  for (const a of store.state.alarms) {
    const extra =
      a.kind === "DELIVERED" ? (a.accepted ? "accepted" : "rejected") : "";
    body.append(
      el("tr", { class: `alarm-${a.kind.toLowerCase()}` }, [
        el("td", {}, [a.ts.toFixed(3)]),
        el("td", {}, [a.alarm_id]),
        el("td", {}, [a.kind]),
        el("td", {}, [a.vnf_id]),
        el("td", {}, [a.rule_id ?? ""]),
        el("td", {}, [extra]),
        el("td", {}, [
          a.kind === "FIRED"
            ? button(
                "run actuator",
                () => handlers.runActuator(a.alarm_id, a.vnf_id),
                disabled,
              )
            : "",
        ]),
      ]),
    );
  }

  replaceChildren(
    container,
    el("h2", {}, ["Alarm feed"]),
    store.state.alarms.length
      ? el("table", { class: "grid" }, [
          el("thead", {}, [
            el("tr", {}, [
              el("th", {}, ["t"]),
              el("th", {}, ["alarm"]),
              el("th", {}, ["event"]),
              el("th", {}, ["vnf"]),
              el("th", {}, ["rule"]),
              el("th", {}, [""]),
              el("th", {}, [""]),
            ]),
          ]),
          body,
        ])
      : el("p", { class: "empty" }, ["no alarms yet"]),
  );
}
