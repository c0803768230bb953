/** Tiny DOM builders; all data lands as text nodes, never as markup. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const child of children) {
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

export function svgEl(
  tag: string,
  attrs: Record<string, string> = {},
): SVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function replaceChildren(parent: Element, ...nodes: (Node | string)[]): void {
  parent.textContent = "";
  for (const node of nodes) {
    parent.append(typeof node === "string" ? document.createTextNode(node) : node);
  }
}

export function button(
  label: string,
  onClick: () => void,
  disabled = false,
): HTMLButtonElement {
  const b = el("button", {}, [label]);
  b.disabled = disabled;
  b.addEventListener("click", onClick);
  return b;
}
