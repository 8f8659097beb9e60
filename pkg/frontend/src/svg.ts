// Minimal SVG line-chart writer. Every plotted point carries the exact
// CSV strings it came from in data-x / data-y attributes, and slope
// annotations carry theirs in data-slope, so a reader of the image can
// check each number against the source file. Nothing is recomputed
// here; scales and pixel placement are presentation only.

export interface Point {
    x: number;
    y: number;
    rawX: string;
    rawY: string;
}

export interface Series {
    label: string;
    points: Point[];
    annotation?: { text: string; raw: string };
}

export type Scale = "linear" | "log";

export interface Scene {
    title: string;
    xLabel: string;
    yLabel: string;
    xScale: Scale;
    yScale: Scale;
    series: Series[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 180, top: 40, bottom: 50 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
    "#393b79", "#ad494a"];

function esc(s: string): string {
    return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

function toScale(v: number, scale: Scale): number {
    return scale === "log" ? Math.log10(v) : v;
}

function ticks(lo: number, hi: number, scale: Scale): number[] {
    if (scale === "log") {
        const out: number[] = [];
        for (let d = Math.ceil(lo); d <= Math.floor(hi); d++) out.push(d);
        if (out.length === 0) out.push(lo, hi);
        return out;
    }
    const span = hi - lo;
    const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
    const mult = span / step > 8 ? 2 : 1;
    const out: number[] = [];
    for (let v = Math.ceil(lo / (step * mult)) * step * mult; v <= hi + 1e-12;
        v += step * mult) {
        out.push(v);
    }
    return out;
}

function tickLabel(v: number, scale: Scale): string {
    if (scale === "log") {
        if (v >= -3 && v <= 3) {
            return String(Number(Math.pow(10, v).toPrecision(3)));
        }
        return `1e${v}`;
    }
    return String(Number(v.toPrecision(4)));
}

export function renderScene(scene: Scene): string {
    const pts = scene.series.flatMap(s => s.points);
    if (pts.length === 0) throw new Error("no data rows");
    for (const p of pts) {
        if (scene.xScale === "log" && p.x <= 0) {
            throw new Error(`log x-axis cannot place ${p.rawX}`);
        }
        if (scene.yScale === "log" && p.y <= 0) {
            throw new Error(`log y-axis cannot place ${p.rawY}`);
        }
    }
    let xLo = Math.min(...pts.map(p => toScale(p.x, scene.xScale)));
    let xHi = Math.max(...pts.map(p => toScale(p.x, scene.xScale)));
    let yLo = Math.min(...pts.map(p => toScale(p.y, scene.yScale)));
    let yHi = Math.max(...pts.map(p => toScale(p.y, scene.yScale)));
    if (xHi === xLo) { xLo -= 0.5; xHi += 0.5; }
    if (yHi === yLo) { yLo -= 0.5; yHi += 0.5; }
    const padY = 0.05 * (yHi - yLo);
    yLo -= padY;
    yHi += padY;

    const plotW = WIDTH - MARGIN.left - MARGIN.right;
    const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const px = (v: number) =>
        MARGIN.left + ((toScale(v, scene.xScale) - xLo) / (xHi - xLo)) * plotW;
    const py = (v: number) =>
        MARGIN.top + plotH
        - ((toScale(v, scene.yScale) - yLo) / (yHi - yLo)) * plotH;

    const parts: string[] = [];
    parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
        `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
        `font-family="sans-serif" font-size="12">`);
    parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
    parts.push(`<text x="${WIDTH / 2}" y="22" text-anchor="middle" ` +
        `font-size="15">${esc(scene.title)}</text>`);

    // axes and ticks
    const x0 = MARGIN.left;
    const y0 = MARGIN.top + plotH;
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" ` +
        `stroke="black"/>`);
    parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" ` +
        `stroke="black"/>`);
    for (const t of ticks(xLo, xHi, scene.xScale)) {
        const x = MARGIN.left + ((t - xLo) / (xHi - xLo)) * plotW;
        parts.push(`<line x1="${x}" y1="${y0}" x2="${x}" y2="${y0 + 5}" ` +
            `stroke="black"/>`);
        parts.push(`<text x="${x}" y="${y0 + 18}" text-anchor="middle">` +
            `${esc(tickLabel(t, scene.xScale))}</text>`);
    }
    for (const t of ticks(yLo, yHi, scene.yScale)) {
        const y = MARGIN.top + plotH - ((t - yLo) / (yHi - yLo)) * plotH;
        parts.push(`<line x1="${x0 - 5}" y1="${y}" x2="${x0}" y2="${y}" ` +
            `stroke="black"/>`);
        parts.push(`<text x="${x0 - 8}" y="${y + 4}" text-anchor="end">` +
            `${esc(tickLabel(t, scene.yScale))}</text>`);
    }
    parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" ` +
        `text-anchor="middle">${esc(scene.xLabel)}</text>`);
    parts.push(`<text x="18" y="${MARGIN.top + plotH / 2}" ` +
        `text-anchor="middle" transform="rotate(-90 18 ` +
        `${MARGIN.top + plotH / 2})">${esc(scene.yLabel)}</text>`);

    // series
    scene.series.forEach((s, k) => {
        const color = PALETTE[k % PALETTE.length];
        const coords = s.points
            .map(p => `${px(p.x).toFixed(2)},${py(p.y).toFixed(2)}`)
            .join(" ");
        parts.push(`<polyline points="${coords}" fill="none" ` +
            `stroke="${color}" stroke-width="1.5"/>`);
        for (const p of s.points) {
            parts.push(`<circle cx="${px(p.x).toFixed(2)}" ` +
                `cy="${py(p.y).toFixed(2)}" r="3" fill="${color}" ` +
                `data-series="${esc(s.label)}" data-x="${esc(p.rawX)}" ` +
                `data-y="${esc(p.rawY)}"/>`);
        }
        const ly = MARGIN.top + 14 * (k + 1);
        const lx = MARGIN.left + plotW + 12;
        parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 18}" ` +
            `y2="${ly - 4}" stroke="${color}" stroke-width="3"/>`);
        let label = s.label;
        if (s.annotation) label += ` ${s.annotation.text}`;
        const attrs = s.annotation
            ? ` data-slope="${esc(s.annotation.raw)}"` : "";
        parts.push(`<text x="${lx + 22}" y="${ly}"${attrs}>` +
            `${esc(label)}</text>`);
    });

    parts.push("</svg>");
    return parts.join("\n") + "\n";
}
