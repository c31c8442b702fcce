// Deviation chart: the deviation polyline, the preview correction overlay,
// and draggable pivot markers. Click empty space to add a pivot, drag a
// marker to move it, double-click one to delete it.

import { correctionSeries, dayNumber } from "./interp.js";
import type { Gesture } from "./state.js";
import type { UiState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 900;
const HEIGHT = 320;
const PAD = { left: 48, right: 16, top: 12, bottom: 28 };

export class DeviationChart {
  private svg: SVGSVGElement;
  private dragIndex: number | null = null;

  constructor(
    private host: HTMLElement,
    private onGesture: (gesture: Gesture) => void,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "deviation-chart");
    host.appendChild(this.svg);
  }

  render(state: UiState): void {
    const { dates, deviation, pivots } = state;
    this.svg.replaceChildren();
    if (dates.length === 0) return;

    const x0 = dayNumber(dates[0]);
    const x1 = dayNumber(dates[dates.length - 1]);
    const values = pivots.length
      ? deviation.concat(pivots.map((p) => p.value))
      : deviation;
    const yMin = Math.min(...values, 0) - 0.05;
    const yMax = Math.max(...values, 0) + 0.05;

    const toX = (iso: string) =>
      PAD.left + ((dayNumber(iso) - x0) / Math.max(x1 - x0, 1)) * (WIDTH - PAD.left - PAD.right);
    const toY = (v: number) =>
      PAD.top + ((yMax - v) / (yMax - yMin)) * (HEIGHT - PAD.top - PAD.bottom);
    const fromPoint = (event: MouseEvent): { date: string; value: number } | null => {
      const rect = this.svg.getBoundingClientRect();
      const px = ((event.clientX - rect.left) / rect.width) * WIDTH;
      const py = ((event.clientY - rect.top) / rect.height) * HEIGHT;
      const frac = (px - PAD.left) / (WIDTH - PAD.left - PAD.right);
      if (frac < 0 || frac > 1) return null;
      const day = Math.round(x0 + frac * (x1 - x0));
      const iso = new Date(day * 86_400_000).toISOString().slice(0, 10);
      const value = yMax - ((py - PAD.top) / (HEIGHT - PAD.top - PAD.bottom)) * (yMax - yMin);
      return { date: iso, value };
    };

    this.line(PAD.left, toY(0), WIDTH - PAD.right, toY(0), "axis");
    this.text(PAD.left - 6, toY(0), "0", "axis-label");
    for (const v of [yMin + 0.05, yMax - 0.05]) {
      this.text(PAD.left - 6, toY(v), v.toFixed(2), "axis-label");
    }
    this.text(PAD.left, HEIGHT - 8, dates[0], "axis-label start");
    this.text(WIDTH - PAD.right, HEIGHT - 8, dates[dates.length - 1], "axis-label end");

    this.polyline(dates.map((d, i) => [toX(d), toY(deviation[i])]), "deviation-line");

    if (pivots.length > 0) {
      const preview = correctionSeries(pivots, dates);
      this.polyline(dates.map((d, i) => [toX(d), toY(preview[i])]), "correction-preview");
      const label = this.text(WIDTH - PAD.right, PAD.top + 10, state.dirty ? "preview" : "correction", "preview-label end");
      label.setAttribute("fill", state.dirty ? "#c77d00" : "#2b7a2b");
    }

    const backdrop = document.createElementNS(SVG_NS, "rect");
    backdrop.setAttribute("x", String(PAD.left));
    backdrop.setAttribute("y", String(PAD.top));
    backdrop.setAttribute("width", String(WIDTH - PAD.left - PAD.right));
    backdrop.setAttribute("height", String(HEIGHT - PAD.top - PAD.bottom));
    backdrop.setAttribute("fill", "transparent");
    backdrop.addEventListener("click", (event) => {
      if (this.dragIndex !== null) return;
      const point = fromPoint(event);
      if (point) this.onGesture({ kind: "add", ...point });
    });
    this.svg.appendChild(backdrop);

    pivots.forEach((pivot, index) => {
      const marker = document.createElementNS(SVG_NS, "circle");
      marker.setAttribute("cx", String(toX(pivot.date)));
      marker.setAttribute("cy", String(toY(pivot.value)));
      marker.setAttribute("r", "6");
      marker.setAttribute("class", "pivot-marker");
      marker.setAttribute("data-index", String(index));
      marker.addEventListener("pointerdown", (event) => {
        event.preventDefault();
        this.dragIndex = index;
        marker.setPointerCapture(event.pointerId);
      });
      marker.addEventListener("pointermove", (event) => {
        if (this.dragIndex !== index) return;
        const point = fromPoint(event);
        if (point) this.onGesture({ kind: "move", index, ...point });
      });
      marker.addEventListener("pointerup", () => {
        this.dragIndex = null;
      });
      marker.addEventListener("dblclick", (event) => {
        event.stopPropagation();
        this.onGesture({ kind: "delete", index });
      });
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${pivot.date}: ${pivot.value.toFixed(4)}`;
      marker.appendChild(title);
      this.svg.appendChild(marker);
    });
  }

  private polyline(points: Array<[number, number]>, cls: string): void {
    const el = document.createElementNS(SVG_NS, "polyline");
    el.setAttribute("points", points.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" "));
    el.setAttribute("class", cls);
    el.setAttribute("fill", "none");
    this.svg.appendChild(el);
  }

  private line(x1: number, y1: number, x2: number, y2: number, cls: string): void {
    const el = document.createElementNS(SVG_NS, "line");
    el.setAttribute("x1", String(x1));
    el.setAttribute("y1", String(y1));
    el.setAttribute("x2", String(x2));
    el.setAttribute("y2", String(y2));
    el.setAttribute("class", cls);
    this.svg.appendChild(el);
  }

  private text(x: number, y: number, content: string, cls: string): SVGTextElement {
    const el = document.createElementNS(SVG_NS, "text");
    el.setAttribute("x", String(x));
    el.setAttribute("y", String(y));
    el.setAttribute("class", cls);
    el.textContent = content;
    this.svg.appendChild(el);
    return el;
  }
}
