// CLI: render --kind <k> --in <csv> --out <svg>
//
// Reads one experiment CSV, writes one SVG, and appends a provenance
// line "sha256(input) input -> output" to manifest.txt beside the
// output file.

import { createHash } from "node:crypto";
import { appendFileSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { parseCsv } from "./csv";
import { buildScene, FIGURE_KINDS, FigureKind } from "./figures";
import { renderScene } from "./svg";

const USAGE =
    `usage: render --kind <${FIGURE_KINDS.join("|")}> --in <csv> --out <svg>`;

function parseArgs(argv: string[]): { kind: FigureKind; inPath: string;
    outPath: string } {
    const flags = new Map<string, string>();
    for (let i = 0; i < argv.length; i += 2) {
        const key = argv[i];
        const val = argv[i + 1];
        if (!key.startsWith("--") || val === undefined) {
            throw new Error(USAGE);
        }
        if (flags.has(key)) throw new Error(`duplicate flag ${key}`);
        flags.set(key, val);
    }
    const kind = flags.get("--kind");
    const inPath = flags.get("--in");
    const outPath = flags.get("--out");
    if (!kind || !inPath || !outPath || flags.size !== 3) {
        throw new Error(USAGE);
    }
    if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
        throw new Error(`unknown figure kind '${kind}'; expected one of ` +
            FIGURE_KINDS.join(", "));
    }
    return { kind: kind as FigureKind, inPath, outPath };
}

export function renderFile(kind: FigureKind, inPath: string,
    outPath: string): string {
    const bytes = readFileSync(inPath);
    const scene = buildScene(kind, parseCsv(bytes.toString("utf8")));
    const svg = renderScene(scene);
    writeFileSync(outPath, svg);
    const digest = createHash("sha256").update(bytes).digest("hex");
    const line = `${digest} ${inPath} -> ${outPath}\n`;
    appendFileSync(join(dirname(outPath), "manifest.txt"), line);
    return line;
}

export function main(argv: string[]): number {
    let parsed;
    try {
        parsed = parseArgs(argv);
    } catch (err) {
        console.error((err as Error).message);
        return 2;
    }
    try {
        const line = renderFile(parsed.kind, parsed.inPath, parsed.outPath);
        console.log(line.trimEnd());
        return 0;
    } catch (err) {
        console.error(`render failed: ${(err as Error).message}`);
        return 1;
    }
}

if (typeof require !== "undefined" && require.main === module) {
    process.exit(main(process.argv.slice(2)));
}
