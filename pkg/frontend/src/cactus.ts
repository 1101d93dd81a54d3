/**
 * Cactus plots from solver bench CSVs.
 *
 * Input schema (one row per instance x algorithm):
 *
 *   instance,algorithm,solved,wall_time_ms,oracle_calls,consequences
 *
 * A curve per algorithm: solved rows only, times sorted ascending, point k at
 * (k, k-th smallest wall_time_ms). Unsolved rows never contribute a point, so
 * the curve height at the right edge reads "instances solved within the y
 * limit". Rendering is a pure function of rows + options.
 */

import Papa from "papaparse";

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

export interface BenchRow {
  instance: string;
  algorithm: string;
  solved: boolean;
  wall_time_ms: number;
  oracle_calls: number;
  consequences: string;
}

/** One curve: solve times of the solved rows, ascending. */
export interface CactusSeries {
  algorithm: string;
  times: number[];
}

export interface RenderOptions {
  xmax?: number; // instances axis limit
  ymax?: number; // time axis limit, ms
}

const COLUMNS = ["instance", "algorithm", "solved", "wall_time_ms", "oracle_calls", "consequences"];

const PALETTE = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#f3722c",
  "#7209b7",
  "#0096c7",
  "#b5838d",
  "#6a994e",
];

// ---------------------------------------------------------------------------
// CSV -> rows
// ---------------------------------------------------------------------------

export function parseBench(text: string): BenchRow[] {
  const parsed = Papa.parse<Record<string, unknown>>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`bench CSV row ${(e.row ?? 0) + 2}: ${e.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = COLUMNS.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new Error(`bench CSV missing column(s): ${missing.join(", ")}`);
  }
  return parsed.data.map((raw, i) => {
    const where = `bench CSV row ${i + 2}`;
    const algorithm = String(raw.algorithm ?? "");
    if (!algorithm) throw new Error(`${where}: empty algorithm`);
    const solved = raw.solved;
    if (typeof solved !== "boolean") throw new Error(`${where}: solved must be true or false`);
    const wall = raw.wall_time_ms;
    if (typeof wall !== "number" || !Number.isFinite(wall) || wall < 0) {
      throw new Error(`${where}: bad wall_time_ms ${String(wall)}`);
    }
    const calls = raw.oracle_calls;
    if (typeof calls !== "number" || !Number.isInteger(calls) || calls < 0) {
      throw new Error(`${where}: bad oracle_calls ${String(calls)}`);
    }
    return {
      instance: String(raw.instance ?? ""),
      algorithm,
      solved,
      wall_time_ms: wall,
      oracle_calls: calls,
      consequences: raw.consequences == null ? "" : String(raw.consequences),
    };
  });
}

// ---------------------------------------------------------------------------
// Rows -> curves
// ---------------------------------------------------------------------------

export function buildSeries(rows: BenchRow[]): CactusSeries[] {
  const byAlgo = new Map<string, number[]>();
  for (const row of rows) {
    if (!row.solved) continue;
    const times = byAlgo.get(row.algorithm) ?? [];
    times.push(row.wall_time_ms);
    byAlgo.set(row.algorithm, times);
  }
  return [...byAlgo.keys()].sort().map((algorithm) => ({
    algorithm,
    times: byAlgo.get(algorithm)!.slice().sort((a, b) => a - b),
  }));
}

// ---------------------------------------------------------------------------
// SVG helpers
// ---------------------------------------------------------------------------

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function niceTicks(max: number, count: number): number[] {
  const rough = (max || 1) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = 0; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

function fmtMs(v: number): string {
  return v % 1 === 0 ? String(v) : v.toFixed(1);
}

// ---------------------------------------------------------------------------
// Curves -> SVG
// ---------------------------------------------------------------------------

export function renderCactus(series: CactusSeries[], opts: RenderOptions = {}): string {
  // axis defaults: everything visible, y a touch above the slowest solve
  const maxCount = Math.max(0, ...series.map((s) => s.times.length));
  const maxTime = Math.max(0, ...series.flatMap((s) => s.times));
  const xmax = opts.xmax ?? Math.max(1, maxCount);
  const ymax = opts.ymax ?? Math.max(1, maxTime * 1.1);

  const W = 640;
  const H = 400;
  const ml = 64;
  const mr = 16;
  const mt = 24;
  const mb = 48;
  const pw = W - ml - mr;
  const ph = H - mt - mb;
  const xOf = (k: number) => ml + (k / xmax) * pw;
  const yOf = (ms: number) => mt + ph - (ms / ymax) * ph;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<defs><clipPath id="plot"><rect x="${ml}" y="${mt}" width="${pw}" height="${ph}"/></clipPath></defs>\n`;

  // grid + ticks
  for (const v of niceTicks(ymax, 6)) {
    const y = yOf(v);
    s += `<line x1="${ml}" y1="${y.toFixed(1)}" x2="${ml + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<text x="${ml - 6}" y="${(y + 3).toFixed(1)}" text-anchor="end" font-size="9" fill="#666">${fmtMs(v)}</text>\n`;
  }
  for (const v of niceTicks(xmax, 8)) {
    if (v % 1 !== 0) continue; // instance counts are whole
    const x = xOf(v);
    s += `<line x1="${x.toFixed(1)}" y1="${mt + ph}" x2="${x.toFixed(1)}" y2="${mt + ph + 4}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${mt + ph + 16}" text-anchor="middle" font-size="9" fill="#666">${v}</text>\n`;
  }

  // curves, one group per algorithm, points clipped to the plot area
  series.forEach((sr, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = sr.times.map((ms, i) => [xOf(i + 1), yOf(ms)] as const);
    s += `<g data-algorithm="${esc(sr.algorithm)}" clip-path="url(#plot)">\n`;
    if (pts.length > 1) {
      const path = pts.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
      s += `<polyline fill="none" stroke="${color}" stroke-width="1.2" points="${path}"/>\n`;
    }
    for (const [x, y] of pts) {
      s += `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2.2" fill="${color}"/>\n`;
    }
    s += `</g>\n`;
  });

  // axes frame
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="${ml + pw / 2}" y="${H - 10}" text-anchor="middle" font-size="11" fill="#333">Number of solved instances</text>\n`;
  s += `<text x="14" y="${mt + ph / 2}" text-anchor="middle" font-size="11" fill="#333" transform="rotate(-90,14,${mt + ph / 2})">Per-instance time limit (ms)</text>\n`;

  // legend
  series.forEach((sr, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const y = mt + 10 + idx * 14;
    s += `<line x1="${ml + 10}" y1="${y}" x2="${ml + 28}" y2="${y}" stroke="${color}" stroke-width="1.5"/>\n`;
    s += `<text x="${ml + 33}" y="${y + 3}" font-size="9" fill="#444">${esc(sr.algorithm)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}
