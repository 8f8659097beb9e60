// Reader for the experiment CSVs: '#' comment lines, one header row,
// comma-separated cells with no quoting. Cells stay strings so figures
// can embed the exact file bytes; parse to numbers only where needed.

export interface Table {
    comments: string[];
    header: string[];
    rows: string[][];
}

export function parseCsv(text: string): Table {
    const comments: string[] = [];
    let header: string[] | null = null;
    const rows: string[][] = [];
    for (const line of text.split(/\r?\n/)) {
        if (line === "") continue;
        if (line.startsWith("#")) {
            comments.push(line.slice(1).trim());
            continue;
        }
        const cells = line.split(",");
        if (header === null) {
            header = cells;
            continue;
        }
        if (cells.length !== header.length) {
            throw new Error(
                `ragged row: ${cells.length} cells, expected ${header.length}`);
        }
        rows.push(cells);
    }
    if (header === null) throw new Error("no header row");
    return { comments, header, rows };
}

export function columnIndex(table: Table, name: string): number {
    const i = table.header.indexOf(name);
    if (i < 0) throw new Error(`missing column '${name}'`);
    return i;
}

export function requireColumns(table: Table, names: string[]): void {
    for (const name of names) columnIndex(table, name);
}

export function cell(table: Table, row: string[], name: string): string {
    return row[columnIndex(table, name)];
}
