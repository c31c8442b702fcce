// Report panel: RMSE comparison, coefficient bars, posterior box plots,
// and the VaR readout. Every number shown here came from the service.

import type { ParamSummary, PosteriorResponse, Report } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderReportPanel(
  host: HTMLElement,
  report: Report | null,
  posterior: PosteriorResponse | null,
): void {
  host.replaceChildren();
  if (!report) {
    host.appendChild(paragraph("No refit yet. Place pivots and submit.", "hint"));
    return;
  }

  const rmse = document.createElement("div");
  rmse.className = "rmse-block";
  rmse.appendChild(metric("RMSE base", report.rmse_base.toFixed(2)));
  if (report.rmse_corrected !== undefined) {
    rmse.appendChild(metric("RMSE corrected", report.rmse_corrected.toFixed(2)));
    const drop = 1 - report.rmse_corrected / report.rmse_base;
    rmse.appendChild(metric("improvement", `${(drop * 100).toFixed(1)}%`));
  }
  if (report.sigma_base_median !== undefined) {
    rmse.appendChild(metric("sigma base", report.sigma_base_median.toFixed(4)));
  }
  if (report.sigma_corrected_median !== undefined) {
    rmse.appendChild(metric("sigma corrected", report.sigma_corrected_median.toFixed(4)));
  }
  rmse.appendChild(metric("mode", report.mode));
  if (report.partial) {
    rmse.appendChild(paragraph("Bayesian stage skipped (fast refit).", "hint"));
  }
  host.appendChild(rmse);

  const coeffs = report.coefficients_corrected ?? report.coefficients_base;
  host.appendChild(heading(report.coefficients_corrected ? "Coefficients (corrected model)" : "Coefficients (base model)"));
  host.appendChild(coefficientBars(coeffs));

  if (posterior) {
    host.appendChild(heading("Posterior (box plots)"));
    host.appendChild(boxPlots(posterior.summaries.filter((s) => s.name !== "nu")));
    const varInfo = posterior.var;
    host.appendChild(
      paragraph(
        `VaR ${(varInfo.level * 100).toFixed(0)}% at ${varInfo.horizon_date ?? "horizon"}: ` +
          `price ${varInfo.price_quantile.toFixed(2)} (log ${varInfo.log_quantile.toFixed(4)})`,
        "var-readout",
      ),
    );
  } else if (report.var) {
    host.appendChild(
      paragraph(
        `VaR ${(report.var.level * 100).toFixed(0)}%: price ${report.var.price_quantile.toFixed(2)}`,
        "var-readout",
      ),
    );
  }
}

function metric(label: string, value: string): HTMLElement {
  const el = document.createElement("div");
  el.className = "metric";
  const l = document.createElement("span");
  l.className = "metric-label";
  l.textContent = label;
  const v = document.createElement("span");
  v.className = "metric-value";
  v.textContent = value;
  el.append(l, v);
  return el;
}

function heading(text: string): HTMLElement {
  const el = document.createElement("h3");
  el.textContent = text;
  return el;
}

function paragraph(text: string, cls: string): HTMLElement {
  const el = document.createElement("p");
  el.className = cls;
  el.textContent = text;
  return el;
}

function coefficientBars(coeffs: Record<string, number>): SVGSVGElement {
  const entries = Object.entries(coeffs).filter(([name]) => name !== "intercept");
  const rowHeight = 22;
  const width = 420;
  const height = entries.length * rowHeight + 8;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "coefficient-bars");
  const maxAbs = Math.max(...entries.map(([, v]) => Math.abs(v)), 1e-9);
  const mid = 260;
  const scale = 150 / maxAbs;
  entries.forEach(([name, value], i) => {
    const y = i * rowHeight + 4;
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "4");
    label.setAttribute("y", String(y + 13));
    label.setAttribute("class", "bar-label");
    label.textContent = `${name} (${value.toFixed(3)})`;
    svg.appendChild(label);
    const bar = document.createElementNS(SVG_NS, "rect");
    const w = Math.abs(value) * scale;
    bar.setAttribute("x", String(value >= 0 ? mid : mid - w));
    bar.setAttribute("y", String(y));
    bar.setAttribute("width", String(Math.max(w, 0.5)));
    bar.setAttribute("height", String(rowHeight - 6));
    bar.setAttribute("class", value >= 0 ? "bar positive" : "bar negative");
    svg.appendChild(bar);
  });
  const axis = document.createElementNS(SVG_NS, "line");
  axis.setAttribute("x1", String(mid));
  axis.setAttribute("x2", String(mid));
  axis.setAttribute("y1", "0");
  axis.setAttribute("y2", String(height));
  axis.setAttribute("class", "axis");
  svg.appendChild(axis);
  return svg;
}

function boxPlots(summaries: ParamSummary[]): SVGSVGElement {
  const rowHeight = 26;
  const width = 420;
  const height = summaries.length * rowHeight + 8;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "box-plots");
  const lo = Math.min(...summaries.map((s) => s.whisker_low));
  const hi = Math.max(...summaries.map((s) => s.whisker_high));
  const span = Math.max(hi - lo, 1e-9);
  const toX = (v: number) => 150 + ((v - lo) / span) * (width - 160);
  summaries.forEach((s, i) => {
    const y = i * rowHeight + 4;
    const mid = y + (rowHeight - 6) / 2;
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "4");
    label.setAttribute("y", String(mid + 4));
    label.setAttribute("class", "bar-label");
    label.textContent = s.name;
    svg.appendChild(label);
    const whisker = document.createElementNS(SVG_NS, "line");
    whisker.setAttribute("x1", String(toX(s.whisker_low)));
    whisker.setAttribute("x2", String(toX(s.whisker_high)));
    whisker.setAttribute("y1", String(mid));
    whisker.setAttribute("y2", String(mid));
    whisker.setAttribute("class", "whisker");
    svg.appendChild(whisker);
    const box = document.createElementNS(SVG_NS, "rect");
    box.setAttribute("x", String(toX(s.q25)));
    box.setAttribute("y", String(y));
    box.setAttribute("width", String(Math.max(toX(s.q75) - toX(s.q25), 0.5)));
    box.setAttribute("height", String(rowHeight - 6));
    box.setAttribute("class", "box");
    svg.appendChild(box);
    const median = document.createElementNS(SVG_NS, "line");
    median.setAttribute("x1", String(toX(s.median)));
    median.setAttribute("x2", String(toX(s.median)));
    median.setAttribute("y1", String(y));
    median.setAttribute("y2", String(y + rowHeight - 6));
    median.setAttribute("class", "median");
    svg.appendChild(median);
  });
  return svg;
}
