// One SVG line-chart component, reused by every card: series polyline,
// outlier markers, and shaded alert bands. Only coordinate mapping
// happens here; the values themselves come straight off the payload.

import type { Theme } from "./theme";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartData {
  seriesPoints: { x: number; y: number }[];
  outlierPoints: { x: number; y: number }[];
  bands: { low: number; high: number }[];
}

export function renderChart(
  doc: Document,
  data: ChartData,
  theme: Theme,
  width = 320,
  height = 96,
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "card-chart");

  const all = [...data.seriesPoints, ...data.outlierPoints];
  if (all.length === 0) return svg;

  const xs = all.map((p) => p.x);
  const ys = [
    ...all.map((p) => p.y),
    ...data.bands.flatMap((b) => [b.low, b.high]),
  ];
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const pad = 6;
  const sx = (x: number) => pad + ((x - xMin) / xSpan) * (width - 2 * pad);
  const sy = (y: number) => height - pad - ((y - yMin) / ySpan) * (height - 2 * pad);

  for (const band of data.bands) {
    const rect = doc.createElementNS(SVG_NS, "rect");
    const top = sy(Math.min(band.high, yMax));
    const bottom = sy(Math.max(band.low, yMin));
    rect.setAttribute("x", "0");
    rect.setAttribute("width", String(width));
    rect.setAttribute("y", top.toFixed(1));
    rect.setAttribute("height", Math.max(bottom - top, 0).toFixed(1));
    rect.setAttribute("fill", theme.accent);
    rect.setAttribute("opacity", "0.12");
    rect.setAttribute("class", "alert-band");
    svg.appendChild(rect);
  }

  if (data.seriesPoints.length > 0) {
    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute(
      "points",
      data.seriesPoints.map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" "),
    );
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", theme.chrome);
    line.setAttribute("stroke-width", "1.5");
    line.setAttribute("class", "series-line");
    svg.appendChild(line);
  }

  for (const point of data.outlierPoints) {
    const marker = doc.createElementNS(SVG_NS, "circle");
    marker.setAttribute("cx", sx(point.x).toFixed(1));
    marker.setAttribute("cy", sy(point.y).toFixed(1));
    marker.setAttribute("r", "3");
    marker.setAttribute("fill", "#d03535");
    marker.setAttribute("class", "outlier-marker");
    const title = doc.createElementNS(SVG_NS, "title");
    title.textContent = String(point.y);
    marker.appendChild(title);
    svg.appendChild(marker);
  }

  return svg;
}
