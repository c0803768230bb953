/** Event-stream reader built on fetch so the bearer token can ride along
 * (EventSource cannot set headers). Frames are `data: <json>` blocks
 * separated by blank lines; comment lines keep the connection alive.
 */

import type { EventFrame } from "./types.js";

export interface StreamHandle {
  close(): void;
}

export function parseSseChunk(
  buffer: string,
  onFrame: (frame: EventFrame) => void,
): string {
  let rest = buffer;
  for (;;) {
    const cut = rest.indexOf("\n\n");
    if (cut < 0) return rest;
    const block = rest.slice(0, cut);
    rest = rest.slice(cut + 2);
    for (const line of block.split("\n")) {
      if (line.startsWith("data: ")) {
        onFrame(JSON.parse(line.slice(6)) as EventFrame);
      }
      // lines starting with ":" are keep-alives; ignore
    }
  }
}

export function openEventStream(
  url: string,
  token: string | null,
  onFrame: (frame: EventFrame) => void,
  onStatus: (connected: boolean) => void,
): StreamHandle {
  const controller = new AbortController();
  let closed = false;

  const run = async () => {
    while (!closed) {
      try {
        const headers: Record<string, string> = { Accept: "text/event-stream" };
        if (token) headers["Authorization"] = `Bearer ${token}`;
        const resp = await fetch(url, { headers, signal: controller.signal });
        if (!resp.ok || !resp.body) throw new Error(`stream ${resp.status}`);
        onStatus(true);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          buffer = parseSseChunk(buffer, onFrame);
        }
        throw new Error("stream ended");
      } catch {
        if (closed) return;
        onStatus(false);
        await new Promise((r) => setTimeout(r, 2000));
      }
    }
  };
  void run();

  return {
    close() {
      closed = true;
      controller.abort();
    },
  };
}
