/** Trains a fitness model on generated JSONL records and saves an artifact.
 *
 *   node dist/train.js --data train.jsonl --out artifact_dir --head cf \
 *       [--epochs 3] [--batch 16] [--embed 64] [--hidden 128] \
 *       [--max-list-len 64] [--lcs-mode substr] [--lr 0.003] [--seed 1] \
 *       [--holdout 0.1] [--limit N] [--registry registry.tsv]
 *
 * The registry fingerprint recorded in the dataset's .meta.json (and the
 * --registry file, when given) must agree; mismatches abort.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { floatArg, intArg, parseArgs, requireArg } from "./args";
import { readJsonl, readMeta, seededShuffle, TrainingRecord } from "./data";
import { fnv1a64Hex } from "./fnv";
import {
  CONFIG_DEFAULTS,
  disposeBatch,
  FitnessNet,
  HeadKind,
  LcsMode,
  ModelConfig,
  labelFor,
  numClasses,
  recordBatch,
} from "./model";

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  valAccuracy: number;
}

export interface TrainResult {
  artifactDir: string;
  log: EpochStats[];
}

function argmax(xs: Float32Array | number[], lo: number, hi: number): number {
  let best = lo;
  for (let i = lo + 1; i < hi; i++) {
    if (xs[i] > xs[best]) best = i;
  }
  return best - lo;
}

async function evaluateAccuracy(
  net: FitnessNet,
  records: TrainingRecord[],
  batchSize: number
): Promise<number> {
  const cfg = net.cfg;
  const classes = numClasses(cfg);
  let correct = 0;
  let total = 0;
  for (let lo = 0; lo < records.length; lo += batchSize) {
    const chunk = records.slice(lo, lo + batchSize);
    const batch = recordBatch(cfg, chunk);
    const logits = tf.tidy(() => net.logits(batch.values, batch.fids));
    const data = (await logits.data()) as Float32Array;
    logits.dispose();
    for (let i = 0; i < chunk.length; i++) {
      if (cfg.head === "fp") {
        // Mean per-token binary accuracy at the 0.5 threshold.
        const membership = chunk[i].labels.membership;
        for (let k = 0; k < classes; k++) {
          const p = 1 / (1 + Math.exp(-data[i * classes + k]));
          correct += (p >= 0.5 ? 1 : 0) === (membership[k] ? 1 : 0) ? 1 : 0;
          total += 1;
        }
      } else {
        const predicted = argmax(data, i * classes, (i + 1) * classes);
        const truth = argmax(labelFor(cfg, chunk[i]), 0, classes);
        correct += predicted === truth ? 1 : 0;
        total += 1;
      }
    }
    disposeBatch(batch);
  }
  return correct / total;
}

export async function train(options: {
  dataPath: string;
  outDir: string;
  head: HeadKind;
  epochs: number;
  batchSize: number;
  embedWidth: number;
  hiddenWidth: number;
  maxListLen: number;
  lcsMode: LcsMode;
  learningRate: number;
  seed: number;
  holdout: number;
  limit?: number;
  registryPath?: string;
  quiet?: boolean;
}): Promise<TrainResult> {
  const log = (msg: string) => {
    if (!options.quiet) process.stderr.write(msg + "\n");
  };
  const records = readJsonl(options.dataPath, options.limit);
  const meta = readMeta(options.dataPath);
  let registryFnv1a = meta?.registry_fnv1a ?? null;
  if (options.registryPath) {
    const fileHash = fnv1a64Hex(fs.readFileSync(options.registryPath));
    if (registryFnv1a && registryFnv1a !== fileHash) {
      throw new Error(
        `registry fingerprint mismatch: dataset has ${registryFnv1a}, ` +
          `--registry file hashes to ${fileHash}`
      );
    }
    registryFnv1a = fileHash;
  }

  const sigmaSize = records[0].labels.membership.length;
  const programLength = records[0].target.length;
  const exampleCount = records[0].io.length;
  for (const rec of records) {
    if (
      rec.labels.membership.length !== sigmaSize ||
      rec.target.length !== programLength ||
      rec.io.length !== exampleCount
    ) {
      throw new Error("records must share registry size, program length and example count");
    }
  }

  const cfg: ModelConfig = {
    head: options.head,
    programLength,
    sigmaSize,
    embedWidth: options.embedWidth,
    hiddenWidth: options.hiddenWidth,
    maxListLen: options.maxListLen,
    lcsMode: options.lcsMode,
    seed: options.seed,
    registryFnv1a,
  };
  const net = new FitnessNet(cfg);
  const optimizer = tf.train.adam(options.learningRate);
  const variables = net.variables();

  const shuffled = seededShuffle(records, options.seed);
  const holdoutCount = Math.max(1, Math.round(options.holdout * shuffled.length));
  const holdoutSet = shuffled.slice(0, holdoutCount);
  const trainSet = shuffled.slice(holdoutCount);
  if (trainSet.length === 0) {
    throw new Error("dataset too small for the requested holdout fraction");
  }
  log(
    `training ${options.head} head on ${trainSet.length} records ` +
      `(holdout ${holdoutSet.length}), L=${programLength}, sigma=${sigmaSize}`
  );

  const epochLog: EpochStats[] = [];
  for (let epoch = 1; epoch <= options.epochs; epoch++) {
    const order = seededShuffle(trainSet, options.seed + epoch);
    let lossSum = 0;
    let batches = 0;
    for (let lo = 0; lo < order.length; lo += options.batchSize) {
      const batch = recordBatch(cfg, order.slice(lo, lo + options.batchSize));
      const cost = optimizer.minimize(() => net.loss(batch), true, variables);
      lossSum += (await cost!.data())[0];
      cost!.dispose();
      disposeBatch(batch);
      batches += 1;
    }
    const valAccuracy = await evaluateAccuracy(net, holdoutSet, options.batchSize);
    const stats = { epoch, trainLoss: lossSum / batches, valAccuracy };
    epochLog.push(stats);
    log(
      `epoch ${epoch}: train_loss=${stats.trainLoss.toFixed(4)} ` +
        `val_accuracy=${stats.valAccuracy.toFixed(4)}`
    );
    // Epochs are expensive on this backend; checkpoint after each one.
    await net.save(options.outDir);
    fs.writeFileSync(
      path.join(options.outDir, "train_log.json"),
      JSON.stringify(epochLog, null, 2) + "\n"
    );
  }
  optimizer.dispose();
  return { artifactDir: options.outDir, log: epochLog };
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const head = (args.get("head") ?? "cf") as HeadKind;
  if (!["cf", "lcs", "fp"].includes(head)) {
    throw new Error(`unknown head: ${head}`);
  }
  const lcsMode = (args.get("lcs-mode") ?? CONFIG_DEFAULTS.lcsMode) as LcsMode;
  if (!["substr", "subseq"].includes(lcsMode)) {
    throw new Error(`unknown lcs mode: ${lcsMode}`);
  }
  await train({
    dataPath: requireArg(args, "data"),
    outDir: requireArg(args, "out"),
    head,
    epochs: intArg(args, "epochs", 3),
    batchSize: intArg(args, "batch", 16),
    embedWidth: intArg(args, "embed", CONFIG_DEFAULTS.embedWidth),
    hiddenWidth: intArg(args, "hidden", CONFIG_DEFAULTS.hiddenWidth),
    maxListLen: intArg(args, "max-list-len", CONFIG_DEFAULTS.maxListLen),
    lcsMode,
    learningRate: floatArg(args, "lr", 0.003),
    seed: intArg(args, "seed", CONFIG_DEFAULTS.seed),
    holdout: floatArg(args, "holdout", 0.1),
    limit: args.has("limit") ? intArg(args, "limit", 0) : undefined,
    registryPath: args.get("registry"),
  });
}

if (require.main === module) {
  tf.setBackend("cpu").then(main).catch((err) => {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(1);
  });
}
