import { DEFAULT_LAYOUT, Figure, Layout, xScale, yScale } from "./model.js";

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

/** Deterministic SVG rendering: no timestamps, no randomness, fixed float
 * formatting, so identical input yields byte-identical output. */
export function renderSvg(fig: Figure, layout: Layout = DEFAULT_LAYOUT): string {
  const sx = xScale(fig, layout);
  const sy = yScale(fig, layout);
  const { width, height, margin } = layout;
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333" stroke-width="1"/>`,
  );
  // grid and ticks
  for (const t of fig.yTicks) {
    if (t.v < fig.yRange[0] || t.v > fig.yRange[1]) continue;
    const y = fmt(sy(t.v));
    parts.push(
      `<line x1="${margin.left}" y1="${y}" x2="${width - margin.right}" y2="${y}" ` +
        `stroke="#ddd" stroke-width="0.6"/>`,
    );
    parts.push(
      `<text x="${margin.left - 8}" y="${y}" ${FONT} font-size="12" fill="#333" ` +
        `text-anchor="end" dominant-baseline="middle">${esc(t.label)}</text>`,
    );
  }
  for (const t of fig.xTicks) {
    if (t.v < fig.xRange[0] || t.v > fig.xRange[1]) continue;
    const x = fmt(sx(t.v));
    parts.push(
      `<line x1="${x}" y1="${height - margin.bottom}" x2="${x}" ` +
        `y2="${height - margin.bottom + 5}" stroke="#333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x}" y="${height - margin.bottom + 20}" ${FONT} font-size="12" ` +
        `fill="#333" text-anchor="middle">${esc(t.label)}</text>`,
    );
  }
  // series
  for (const s of fig.series) {
    const dash = s.dashed ? ` stroke-dasharray="7 5"` : "";
    const path = s.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(sx(p.x))} ${fmt(sy(p.y))}`)
      .join(" ");
    parts.push(
      `<path d="${path}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`,
    );
    for (const p of s.points) {
      const x = sx(p.x);
      const y = sy(p.y);
      if (p.err !== undefined) {
        const yLo = fmt(sy(p.y - p.err));
        const yHi = fmt(sy(p.y + p.err));
        parts.push(
          `<line x1="${fmt(x)}" y1="${yLo}" x2="${fmt(x)}" y2="${yHi}" ` +
            `stroke="${s.color}" stroke-width="1.2"/>`,
          `<line x1="${fmt(x - 4)}" y1="${yLo}" x2="${fmt(x + 4)}" y2="${yLo}" ` +
            `stroke="${s.color}" stroke-width="1.2"/>`,
          `<line x1="${fmt(x - 4)}" y1="${yHi}" x2="${fmt(x + 4)}" y2="${yHi}" ` +
            `stroke="${s.color}" stroke-width="1.2"/>`,
        );
      }
      if (s.marker === "circle") {
        parts.push(
          `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="4" fill="${s.color}" stroke="white" stroke-width="1"/>`,
        );
      } else if (s.marker === "square") {
        parts.push(
          `<rect x="${fmt(x - 3.6)}" y="${fmt(y - 3.6)}" width="7.2" height="7.2" ` +
            `fill="${s.color}" stroke="white" stroke-width="1"/>`,
        );
      }
    }
  }
  // legend
  const legendX = margin.left + 14;
  let legendY = margin.top + 18;
  for (const s of fig.series) {
    const dash = s.dashed ? ` stroke-dasharray="7 5"` : "";
    parts.push(
      `<line x1="${legendX}" y1="${legendY - 4}" x2="${legendX + 28}" y2="${legendY - 4}" ` +
        `stroke="${s.color}" stroke-width="1.8"${dash}/>`,
    );
    parts.push(
      `<text x="${legendX + 34}" y="${legendY}" ${FONT} font-size="12" fill="#333">` +
        `${esc(s.label)}</text>`,
    );
    legendY += 18;
  }
  // labels
  parts.push(
    `<text x="${fmt(width / 2)}" y="${margin.top - 16}" ${FONT} font-size="15" ` +
      `fill="#111" text-anchor="middle">${esc(fig.title)}</text>`,
  );
  parts.push(
    `<text x="${fmt(width / 2)}" y="${height - 14}" ${FONT} font-size="13" ` +
      `fill="#111" text-anchor="middle">${esc(fig.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${fmt(height / 2)}" ${FONT} font-size="13" fill="#111" ` +
      `text-anchor="middle" transform="rotate(-90 18 ${fmt(height / 2)})">${esc(fig.yLabel)}</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
