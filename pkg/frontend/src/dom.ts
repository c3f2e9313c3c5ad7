/** Small DOM construction helpers shared by the workbench views. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function clear(root: HTMLElement): void {
  while (root.firstChild) {
    root.removeChild(root.firstChild);
  }
}

export function formatRange(range: [number, number]): string {
  return `[${range[0]}, ${range[1]}]`;
}
