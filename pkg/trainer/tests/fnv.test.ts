import * as fs from "fs";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { fnv1a64, fnv1a64Hex } from "../src/fnv";

describe("fnv1a64", () => {
  it("matches the classic reference vectors", () => {
    expect(fnv1a64(new Uint8Array())).toBe(0xcbf29ce484222325n);
    expect(fnv1a64Hex(new TextEncoder().encode("a"))).toBe("af63dc4c8601ec8c");
    expect(fnv1a64Hex(new TextEncoder().encode("foobar"))).toBe("85944171f73967e8");
  });

  it("agrees with the fingerprint the generator recorded", () => {
    const fixture = path.join(__dirname, "fixtures");
    const meta = JSON.parse(
      fs.readFileSync(path.join(fixture, "train_small.jsonl.meta.json"), "utf-8")
    );
    const registry = fs.readFileSync(path.join(fixture, "registry.tsv"));
    expect(fnv1a64Hex(registry)).toBe(meta.registry_fnv1a);
  });
});
