import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { main, parseArgs } from "../src/cli.js";

const FIX = join(__dirname, "fixtures");

describe("argument parsing", () => {
  it("collects multiple --in paths", () => {
    const args = parseArgs([
      "decay_vs_N_semilog",
      "--in",
      "a.csv",
      "b.csv",
      "--out",
      "fig.svg",
      "--column",
      "vbar_dg",
    ]);
    expect(args.inputs).toEqual(["a.csv", "b.csv"]);
    expect(args.column).toBe("vbar_dg");
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(() => parseArgs(["pie_chart", "--in", "a", "--out", "b"])).toThrowError(/unknown figure kind/);
    expect(() => parseArgs(["histogram", "--out", "b"])).toThrowError(/--in/);
    expect(() => parseArgs(["histogram", "--in", "a"])).toThrowError(/--out/);
  });
});

describe("end to end", () => {
  it("writes an SVG from fixture CSVs", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const out = join(dir, "decay.svg");
    const code = main([
      "decay_vs_N_semilog",
      "--in",
      join(FIX, "summary.csv"),
      "--out",
      out,
      "--column",
      "vbar_off",
      "--ensemble",
      "microcanonical:zero",
    ]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("returns 1 on missing files or columns", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    expect(main(["histogram", "--in", "/nonexistent.csv", "--out", join(dir, "x.svg")])).toBe(1);
    expect(
      main(["mi_vs_distance", "--in", join(FIX, "summary.csv"), "--out", join(dir, "y.svg")]),
    ).toBe(1);
  });
});
