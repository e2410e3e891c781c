/** Tiny string-building helpers for SVG output (no DOM). */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children: string = ""
): string {
  const attrText = Object.entries(attrs)
    .map(([key, value]) => `${key}="${typeof value === "number" ? fmt(value) : value}"`)
    .join(" ");
  return children === ""
    ? `<${tag} ${attrText}/>`
    : `<${tag} ${attrText}>${children}</${tag}>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  attrs: Record<string, string | number> = {}
): string {
  return el(
    "text",
    { x, y, "font-family": "sans-serif", "font-size": 12, fill: "#333", ...attrs },
    esc(content)
  );
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}
