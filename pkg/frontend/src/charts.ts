// Minimal SVG bar chart, enough for the descending category-proportion
// view; no chart library needed for eight bars.

import { percent } from "./format.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function proportionsChart(
  doc: Document,
  proportions: Record<string, number>,
  width = 640,
  barHeight = 26,
): SVGSVGElement {
  const entries = Object.entries(proportions);
  const svg = doc.createElementNS(SVG_NS, "svg");
  const height = Math.max(entries.length * (barHeight + 8), 20);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("role", "img");
  const max = Math.max(...entries.map(([, v]) => v), 0.0001);
  const labelWidth = 170;
  entries.forEach(([name, value], index) => {
    const y = index * (barHeight + 8);
    const bar = doc.createElementNS(SVG_NS, "rect");
    bar.setAttribute("x", String(labelWidth));
    bar.setAttribute("y", String(y));
    bar.setAttribute("height", String(barHeight));
    bar.setAttribute(
      "width",
      String(Math.max(1, (value / max) * (width - labelWidth - 70))),
    );
    bar.setAttribute("fill", "#2f7ed8");
    svg.appendChild(bar);

    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(labelWidth - 8));
    label.setAttribute("y", String(y + barHeight * 0.7));
    label.setAttribute("text-anchor", "end");
    label.setAttribute("class", "chart-label");
    label.textContent = name;
    svg.appendChild(label);

    const value_ = doc.createElementNS(SVG_NS, "text");
    value_.setAttribute(
      "x",
      String(labelWidth + Math.max(1, (value / max) * (width - labelWidth - 70)) + 6),
    );
    value_.setAttribute("y", String(y + barHeight * 0.7));
    value_.setAttribute("class", "chart-value");
    value_.textContent = percent(value);
    svg.appendChild(value_);
  });
  return svg;
}
