import { describe, expect, it } from "vitest";

import { cell, columnIndex, parseCsv, requireColumns } from "../src/csv";

const SAMPLE = `# config_hash=abc123
# grid=n2_N64_L2
beta,weight,ratio
0.25,unit,1.0189
0.001,power:0.3,1.6266
`;

describe("parseCsv", () => {
    it("separates comments, header, and rows", () => {
        const t = parseCsv(SAMPLE);
        expect(t.comments).toEqual(["config_hash=abc123", "grid=n2_N64_L2"]);
        expect(t.header).toEqual(["beta", "weight", "ratio"]);
        expect(t.rows).toHaveLength(2);
        expect(t.rows[1]).toEqual(["0.001", "power:0.3", "1.6266"]);
    });

    it("keeps cells as exact strings", () => {
        const t = parseCsv("v\n0.10000000000000001\n");
        expect(t.rows[0][0]).toBe("0.10000000000000001");
    });

    it("rejects ragged rows", () => {
        expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(/ragged row/);
    });

    it("rejects headerless text", () => {
        expect(() => parseCsv("# only a comment\n")).toThrow(/no header/);
    });

    it("tolerates blank lines and a header-only file", () => {
        const t = parseCsv("a,b\n\n");
        expect(t.rows).toHaveLength(0);
    });
});

describe("column access", () => {
    it("names the missing column", () => {
        const t = parseCsv(SAMPLE);
        expect(() => columnIndex(t, "d_used")).toThrow(
            /missing column 'd_used'/);
        expect(() => requireColumns(t, ["beta", "nope"])).toThrow(
            /missing column 'nope'/);
    });

    it("reads cells by name", () => {
        const t = parseCsv(SAMPLE);
        expect(cell(t, t.rows[0], "weight")).toBe("unit");
    });
});
