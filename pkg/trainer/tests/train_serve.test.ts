import { spawn } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as readline from "readline";
import * as tf from "@tensorflow/tfjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { readJsonl } from "../src/data";
import { FitnessNet } from "../src/model";
import { ModelServer } from "../src/serve";
import { train } from "../src/train";

const FIXTURE = path.join(__dirname, "fixtures", "train_small.jsonl");
const REGISTRY = path.join(__dirname, "fixtures", "registry.tsv");
const DIST_SERVE = path.join(__dirname, "..", "dist", "serve.js");

let cfDir: string;
let fpDir: string;

beforeAll(async () => {
  await tf.setBackend("cpu");
  cfDir = fs.mkdtempSync(path.join(os.tmpdir(), "cf-artifact-"));
  fpDir = fs.mkdtempSync(path.join(os.tmpdir(), "fp-artifact-"));
  const base = {
    dataPath: FIXTURE,
    epochs: 1,
    batchSize: 16,
    embedWidth: 8,
    hiddenWidth: 12,
    maxListLen: 6,
    lcsMode: "substr" as const,
    learningRate: 0.01,
    seed: 2,
    holdout: 0.1,
    registryPath: REGISTRY,
    quiet: true,
  };
  await train({ ...base, outDir: cfDir, head: "cf" });
  await train({ ...base, outDir: fpDir, head: "fp" });
}, 240_000);

describe("train", () => {
  it("writes a reloadable artifact with the registry fingerprint", () => {
    const cfg = JSON.parse(fs.readFileSync(path.join(cfDir, "config.json"), "utf-8"));
    expect(cfg.head).toBe("cf");
    expect(cfg.registryFnv1a).toBe("f262102752abce73");
    const net = FitnessNet.load(cfDir);
    expect(net.cfg.programLength).toBe(2);
    const log = JSON.parse(fs.readFileSync(path.join(cfDir, "train_log.json"), "utf-8"));
    expect(log.length).toBe(1);
    expect(log[0]).toHaveProperty("valAccuracy");
  });

  it("rejects a registry whose fingerprint differs from the dataset", async () => {
    const badRegistry = path.join(os.tmpdir(), "bad-registry.tsv");
    fs.writeFileSync(badRegistry, "0\tSORT\tLIST\tLIST\n");
    await expect(
      train({
        dataPath: FIXTURE,
        outDir: fs.mkdtempSync(path.join(os.tmpdir(), "bad-")),
        head: "cf",
        epochs: 1,
        batchSize: 8,
        embedWidth: 8,
        hiddenWidth: 12,
        maxListLen: 6,
        lcsMode: "substr",
        learningRate: 0.01,
        seed: 2,
        holdout: 0.1,
        registryPath: badRegistry,
        quiet: true,
      })
    ).rejects.toThrow(/fingerprint mismatch/);
  });

  it("is reproducible for a fixed seed", async () => {
    const dirA = fs.mkdtempSync(path.join(os.tmpdir(), "repro-a-"));
    const dirB = fs.mkdtempSync(path.join(os.tmpdir(), "repro-b-"));
    const opts = {
      dataPath: FIXTURE,
      head: "cf" as const,
      epochs: 1,
      batchSize: 16,
      embedWidth: 8,
      hiddenWidth: 12,
      maxListLen: 6,
      lcsMode: "substr" as const,
      learningRate: 0.01,
      seed: 7,
      holdout: 0.1,
      quiet: true,
      limit: 30,
    };
    const a = await train({ ...opts, outDir: dirA });
    const b = await train({ ...opts, outDir: dirB });
    expect(a.log).toEqual(b.log);
  }, 240_000);
});

describe("ModelServer (in process)", () => {
  const io = [
    { in: [3, -1, 2], out: [2, 3] },
    { in: [5, 4], out: [4, 5] },
  ];

  it("scores candidates within the class range", async () => {
    const server = new ModelServer(FitnessNet.load(cfDir));
    const resp = JSON.parse(
      await server.handleLine(
        JSON.stringify({
          id: 9,
          op: "score",
          io,
          candidates: [[8, 7], [0, 9]],
          traces: [
            [[[-1, 2, 3], [3, 2, -1]], [[4, 5], [5, 4]]],
            [[3, [3]], [5, [5]]],
          ],
        })
      )
    );
    expect(resp.id).toBe(9);
    expect(resp.scores.length).toBe(2);
    for (const s of resp.scores) {
      expect(s).toBeGreaterThanOrEqual(0);
      expect(s).toBeLessThanOrEqual(2);
    }
  });

  it("serves probability maps from the fp head and sums them as scores", async () => {
    const server = new ModelServer(FitnessNet.load(fpDir));
    const pmapResp = JSON.parse(
      await server.handleLine(JSON.stringify({ id: 1, op: "pmap", io, candidates: [], traces: [] }))
    );
    expect(pmapResp.pmap.length).toBe(38);
    for (const p of pmapResp.pmap) {
      expect(p).toBeGreaterThanOrEqual(0);
      expect(p).toBeLessThanOrEqual(1);
    }
    const scoreResp = JSON.parse(
      await server.handleLine(
        JSON.stringify({ id: 2, op: "score", io, candidates: [[4, 4, 7]], traces: [[[], []]] })
      )
    );
    const expected = pmapResp.pmap[4] + pmapResp.pmap[7];
    expect(scoreResp.scores[0]).toBeCloseTo(expected, 5);
  });

  it("returns an empty pmap for classifier heads", async () => {
    const server = new ModelServer(FitnessNet.load(cfDir));
    const resp = JSON.parse(
      await server.handleLine(JSON.stringify({ id: 3, op: "pmap", io, candidates: [], traces: [] }))
    );
    expect(resp.pmap).toEqual([]);
  });

  it("rejects bad requests without crashing", async () => {
    const server = new ModelServer(FitnessNet.load(cfDir));
    const bad = JSON.parse(await server.handleLine("not json at all"));
    expect(bad.error).toBeTruthy();
    const badOp = JSON.parse(await server.handleLine(JSON.stringify({ id: 4, op: "dance" })));
    expect(badOp.id).toBe(4);
    expect(badOp.error).toMatch(/unknown op/);
    const badToken = JSON.parse(
      await server.handleLine(
        JSON.stringify({ id: 5, op: "score", io, candidates: [[99]], traces: [[[], []]] })
      )
    );
    expect(badToken.error).toMatch(/token ids/);
    const ok = JSON.parse(
      await server.handleLine(
        JSON.stringify({ id: 6, op: "score", io, candidates: [[1, 2]], traces: [[[[1], [2]], [[1], [2]]]] })
      )
    );
    expect(ok.scores.length).toBe(1);
  });
});

describe("serve subprocess", () => {
  it("preserves request ids across many interleaved requests", async () => {
    const proc = spawn("node", [DIST_SERVE, "--artifact", cfDir], {
      stdio: ["pipe", "pipe", "ignore"],
    });
    const rl = readline.createInterface({ input: proc.stdout });
    const replies: Record<string, unknown>[] = [];
    const done = new Promise<void>((resolve) => {
      rl.on("line", (line) => {
        replies.push(JSON.parse(line));
        if (replies.length === 200) resolve();
      });
    });
    const io = [{ in: [1, 2], out: [2, 1] }];
    for (let i = 0; i < 200; i++) {
      const req =
        i % 3 === 2
          ? { id: i, op: "pmap", io, candidates: [], traces: [] }
          : {
              id: i,
              op: "score",
              io,
              candidates: [[i % 38, (i + 1) % 38]],
              traces: [[[[1], [2]]]],
            };
      proc.stdin.write(JSON.stringify(req) + "\n");
    }
    await done;
    proc.stdin.end();
    expect(replies.map((r) => r.id)).toEqual(Array.from({ length: 200 }, (_, i) => i));
    for (const r of replies) {
      expect("scores" in r || "pmap" in r).toBe(true);
    }
  }, 240_000);
});
