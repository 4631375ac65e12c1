/** Serves fitness scores over newline-delimited JSON on stdin/stdout.
 *
 *   node dist/serve.js --artifact artifact_dir
 *
 * Requests:  {"id": int, "op": "score"|"pmap", "io": [{"in":..,"out":..}],
 *             "candidates": [[tokenIds]...], "traces": [[[values]...]...]}
 * Responses: {"id": int, "scores": [..]} | {"id": int, "pmap": [..]}
 *            | {"id": int, "error": str}
 *
 * cf/lcs artifacts score a candidate as the expected class value of the
 * classifier; fp artifacts respond to `pmap` with per-token probabilities
 * and score candidates as the probability mass of their distinct tokens.
 * A `pmap` request against a cf/lcs artifact returns an empty map (the
 * caller treats that as "no map available"). Malformed lines produce error
 * responses; the loop never exits on bad input.
 */

import * as readline from "readline";
import * as tf from "@tensorflow/tfjs";

import { parseArgs, requireArg } from "./args";
import { Value } from "./encode";
import { encodeInputs, FitnessNet, numClasses } from "./model";

interface Request {
  id?: unknown;
  op?: unknown;
  io?: { in: Value; out: Value }[];
  candidates?: number[][];
  traces?: Value[][][];
}

export class ModelServer {
  private pmapCacheKey: string | null = null;
  private pmapCacheValue: number[] | null = null;

  constructor(private net: FitnessNet) {}

  private checkIo(req: Request): { in: Value; out: Value }[] {
    if (!Array.isArray(req.io) || req.io.length === 0) {
      throw new Error("request needs a non-empty io array");
    }
    return req.io;
  }

  private async predictPmap(io: { in: Value; out: Value }[]): Promise<number[]> {
    // A synthesis run asks about one spec over and over; cache the last map.
    const key = JSON.stringify(io);
    if (this.pmapCacheKey === key && this.pmapCacheValue) {
      return this.pmapCacheValue;
    }
    const encoded = encodeInputs(this.net.cfg, [io], [null], [null]);
    const probs = tf.tidy(() =>
      this.net.readout(this.net.logits(encoded.values, encoded.fids))
    );
    const data = Array.from(await probs.data());
    probs.dispose();
    encoded.values.dispose();
    encoded.fids?.dispose();
    this.pmapCacheKey = key;
    this.pmapCacheValue = data;
    return data;
  }

  async score(req: Request): Promise<number[]> {
    const io = this.checkIo(req);
    const candidates = req.candidates;
    if (!Array.isArray(candidates) || candidates.length === 0) {
      throw new Error("score requests need candidates");
    }
    const sigma = this.net.cfg.sigmaSize;
    for (const cand of candidates) {
      if (!Array.isArray(cand) || cand.some((t) => !Number.isInteger(t) || t < 0 || t >= sigma)) {
        throw new Error(`candidate token ids must be integers in [0, ${sigma})`);
      }
    }
    if (this.net.cfg.head === "fp") {
      const pmap = await this.predictPmap(io);
      return candidates.map((cand) =>
        [...new Set(cand)].reduce((acc, t) => acc + pmap[t], 0)
      );
    }
    const traces = req.traces;
    if (!Array.isArray(traces) || traces.length !== candidates.length) {
      throw new Error("score requests need one trace set per candidate");
    }
    const encoded = encodeInputs(
      this.net.cfg,
      candidates.map(() => io),
      candidates,
      traces
    );
    const values = tf.tidy(() =>
      this.net.readout(this.net.logits(encoded.values, encoded.fids))
    );
    const data = Array.from(await values.data());
    values.dispose();
    encoded.values.dispose();
    encoded.fids?.dispose();
    return data;
  }

  async pmap(req: Request): Promise<number[]> {
    if (this.net.cfg.head !== "fp") {
      return []; // no probability map for classifier heads
    }
    return this.predictPmap(this.checkIo(req));
  }

  async handleLine(line: string): Promise<string> {
    let id: unknown = null;
    try {
      const req = JSON.parse(line) as Request;
      id = req.id ?? null;
      if (req.op === "score") {
        return JSON.stringify({ id: req.id, scores: await this.score(req) });
      }
      if (req.op === "pmap") {
        return JSON.stringify({ id: req.id, pmap: await this.pmap(req) });
      }
      throw new Error(`unknown op: ${String(req.op)}`);
    } catch (err) {
      return JSON.stringify({ id, error: (err as Error).message });
    }
  }
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const net = FitnessNet.load(requireArg(args, "artifact"));
  process.stderr.write(
    `serving ${net.cfg.head} head (L=${net.cfg.programLength}, ` +
      `sigma=${net.cfg.sigmaSize}, classes=${numClasses(net.cfg)})\n`
  );
  const server = new ModelServer(net);
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  // One request at a time: responses must come back in request order.
  const queue: string[] = [];
  let busy = false;
  const pump = async () => {
    if (busy) return;
    busy = true;
    while (queue.length > 0) {
      const line = queue.shift()!;
      if (!line.trim()) continue;
      process.stdout.write((await server.handleLine(line)) + "\n");
    }
    busy = false;
  };
  rl.on("line", (line) => {
    queue.push(line);
    void pump();
  });
  await new Promise<void>((resolve) => rl.on("close", resolve));
}

if (require.main === module) {
  tf.setBackend("cpu").then(main).catch((err) => {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(1);
  });
}
