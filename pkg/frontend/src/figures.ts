// One builder per figure kind. Each validates the columns it needs,
// groups rows into series, and hands the exact CSV strings through to
// the SVG layer; no quantity is ever recomputed from other columns.

import { Table, columnIndex } from "./csv";
import { Point, Scene, Series } from "./svg";

export const FIGURE_KINDS = ["uniformity", "domination", "envelope",
    "weights"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

function point(rawX: string, rawY: string): Point {
    return { x: Number(rawX), y: Number(rawY), rawX, rawY };
}

function grouped(table: Table, keyCols: string[], xCol: string,
    yCol: string): Map<string, Point[]> {
    const ki = keyCols.map(c => columnIndex(table, c));
    const xi = columnIndex(table, xCol);
    const yi = columnIndex(table, yCol);
    const out = new Map<string, Point[]>();
    for (const row of table.rows) {
        const key = ki.map(i => row[i]).join(" ");
        if (!out.has(key)) out.set(key, []);
        out.get(key)!.push(point(row[xi], row[yi]));
    }
    return out;
}

function sortByX(points: Point[]): Point[] {
    return [...points].sort((a, b) => a.x - b.x);
}

function uniformity(table: Table): Scene {
    const series: Series[] = [];
    for (const [wid, pts] of grouped(table, ["weight"], "beta", "ratio")) {
        series.push({ label: `R, ${wid}`, points: sortByX(pts) });
    }
    // the predictor repeats across weights and functions; keep one copy
    // per beta, identified by its exact cell string
    const bi = columnIndex(table, "beta");
    const pi = columnIndex(table, "predictor");
    const seen = new Map<string, Point>();
    for (const row of table.rows) {
        if (!seen.has(row[bi])) seen.set(row[bi], point(row[bi], row[pi]));
    }
    series.push({
        label: "classical predictor",
        points: sortByX([...seen.values()]),
    });
    return {
        title: "weighted norm ratio vs fractional order",
        xLabel: "beta", yLabel: "ratio",
        xScale: "log", yScale: "log", series,
    };
}

function domination(table: Table): Scene {
    // d_used is set per (beta, l); weight and function rows repeat it
    const series: Series[] = [];
    for (const [l, pts] of grouped(table, ["l"], "beta", "d_used")) {
        const unique = new Map<string, Point>();
        for (const p of pts) unique.set(`${p.rawX} ${p.rawY}`, p);
        series.push({
            label: `smoothing l=${l}`,
            points: sortByX([...unique.values()]),
        });
    }
    return {
        title: "adaptive domination constant vs fractional order",
        xLabel: "beta", yLabel: "d_used",
        xScale: "log", yScale: "linear", series,
    };
}

function envelope(table: Table): Scene {
    const [bi, ti, di, xi, yi, si] = ["beta", "t", "direction", "two_j_xi",
        "scaled_khat", "slope_small"].map(c => columnIndex(table, c));
    const groups = new Map<string, { pts: Point[]; slope: string }>();
    for (const row of table.rows) {
        if (Number(row[xi]) <= 0 || Number(row[yi]) <= 0) continue;
        const key = `${row[bi]} ${row[ti]} ${row[di]}`;
        if (!groups.has(key)) {
            // every row of a line carries the same fitted slope; keep
            // the cell text, never a refit
            groups.set(key, { pts: [], slope: row[si] });
        }
        groups.get(key)!.pts.push(point(row[xi], row[yi]));
    }
    const series: Series[] = [];
    for (const [key, g] of groups) {
        const [beta, t, direction] = key.split(" ");
        series.push({
            label: `beta=${beta} t=${t} dir=${direction}`,
            points: sortByX(g.pts),
            annotation: Number.isNaN(Number(g.slope)) ? undefined
                : { text: `slope ${Number(g.slope).toFixed(3)}`, raw: g.slope },
        });
    }
    return {
        title: "normalized multiplier vs dilated frequency",
        xLabel: "2^j |xi|", yLabel: "normalized |khat|",
        xScale: "log", yScale: "log", series,
    };
}

function weights(table: Table): Scene {
    const series: Series[] = [];
    for (const [wid, pts] of grouped(table, ["weight_id"], "q", "value")) {
        series.push({ label: wid, points: sortByX(pts) });
    }
    return {
        title: "characteristic vs integrability exponent",
        xLabel: "q", yLabel: "characteristic",
        xScale: "linear", yScale: "linear", series,
    };
}

const BUILDERS: Record<FigureKind, (table: Table) => Scene> = {
    uniformity, domination, envelope, weights,
};

export function buildScene(kind: FigureKind, table: Table): Scene {
    if (table.rows.length === 0) throw new Error("no data rows");
    return BUILDERS[kind](table);
}
