/** Sequence-encoder fitness model.
 *
 * Per io example, the input and output value sequences and (for the cf/lcs
 * heads) each trace step are run through a shared embedding and LSTM
 * encoder; trace-step vectors get the one-hot of the executed token
 * appended. Two stacked LSTM layers combine one example's vectors into a
 * single hidden state, a further LSTM combines the per-example states, and
 * a dense head emits class logits: cf/lcs are (L+1)-way classifiers, fp is
 * a per-token sigmoid multilabel head over the registry.
 *
 * The fp head conditions on the io examples alone, so probability maps can
 * be served without any candidate attached.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { TrainingRecord } from "./data";
import { PAD, VOCAB_SIZE, Value, encodeValueSeq, oneHot } from "./encode";

export type HeadKind = "cf" | "lcs" | "fp";
export type LcsMode = "substr" | "subseq";

export interface ModelConfig {
  head: HeadKind;
  programLength: number;
  sigmaSize: number;
  embedWidth: number;
  hiddenWidth: number;
  maxListLen: number;
  lcsMode: LcsMode;
  seed: number;
  registryFnv1a: string | null;
}

export const CONFIG_DEFAULTS = {
  embedWidth: 64,
  hiddenWidth: 128,
  maxListLen: 64,
  lcsMode: "substr" as LcsMode,
  seed: 1,
};

export interface Batch {
  /** int32 [B, m, S, T] encoded value sequences */
  values: tf.Tensor4D;
  /** float32 [B, m, S, sigma] one-hot executed tokens (zero rows for in/out) */
  fids: tf.Tensor4D | null;
  /** float32 [B, C] one-/multi-hot labels */
  labels: tf.Tensor2D;
}

export function numClasses(cfg: ModelConfig): number {
  return cfg.head === "fp" ? cfg.sigmaSize : cfg.programLength + 1;
}

export function usesTraces(cfg: ModelConfig): boolean {
  return cfg.head !== "fp";
}

function seqCount(cfg: ModelConfig): number {
  return usesTraces(cfg) ? 2 + cfg.programLength : 2;
}

export class FitnessNet {
  readonly cfg: ModelConfig;
  private embed: tf.layers.Layer;
  private seqEncoder: tf.layers.Layer;
  private combiner1: tf.layers.Layer;
  private combiner2: tf.layers.Layer;
  private exampleEncoder: tf.layers.Layer;
  private head: tf.layers.Layer;

  constructor(cfg: ModelConfig) {
    this.cfg = cfg;
    const glorot = (offset: number) =>
      tf.initializers.glorotUniform({ seed: cfg.seed + offset });
    this.embed = tf.layers.embedding({
      inputDim: VOCAB_SIZE,
      outputDim: cfg.embedWidth,
      embeddingsInitializer: tf.initializers.randomUniform({
        minval: -0.05,
        maxval: 0.05,
        seed: cfg.seed,
      }),
      name: "value_embedding",
    });
    const lstm = (name: string, offset: number, returnSequences: boolean) =>
      tf.layers.lstm({
        units: cfg.hiddenWidth,
        returnSequences,
        kernelInitializer: glorot(offset),
        recurrentInitializer: glorot(offset + 1),
        name,
      });
    this.seqEncoder = lstm("sequence_encoder", 10, false);
    this.combiner1 = lstm("example_combiner_1", 20, true);
    this.combiner2 = lstm("example_combiner_2", 30, false);
    this.exampleEncoder = lstm("example_set_encoder", 40, false);
    this.head = tf.layers.dense({
      units: numClasses(cfg),
      kernelInitializer: glorot(50),
      name: "head",
    });
    this.buildOnce();
  }

  private buildOnce(): void {
    tf.tidy(() => {
      const dummyValues = tf.zeros(
        [1, 1, seqCount(this.cfg), this.cfg.maxListLen],
        "int32"
      ) as tf.Tensor4D;
      const dummyFids = usesTraces(this.cfg)
        ? (tf.zeros([1, 1, seqCount(this.cfg), this.cfg.sigmaSize]) as tf.Tensor4D)
        : null;
      this.logits(dummyValues, dummyFids);
    });
  }

  logits(values: tf.Tensor4D, fids: tf.Tensor4D | null): tf.Tensor2D {
    const [b, m, s, t] = values.shape;
    const flat = values.reshape([b * m * s, t]);
    const embedded = this.embed.apply(flat) as tf.Tensor;
    let perSeq = this.seqEncoder.apply(embedded) as tf.Tensor;
    if (usesTraces(this.cfg)) {
      if (fids === null) {
        throw new Error(`${this.cfg.head} head needs executed-token one-hots`);
      }
      perSeq = tf.concat([perSeq, fids.reshape([b * m * s, this.cfg.sigmaSize])], 1);
    }
    const perExample = perSeq.reshape([b * m, s, perSeq.shape[1] as number]);
    const combined = this.combiner2.apply(
      this.combiner1.apply(perExample)
    ) as tf.Tensor;
    const examples = combined.reshape([b, m, this.cfg.hiddenWidth]);
    const pooled = this.exampleEncoder.apply(examples) as tf.Tensor;
    return this.head.apply(pooled) as tf.Tensor2D;
  }

  loss(batch: Batch): tf.Scalar {
    const logits = this.logits(batch.values, batch.fids);
    if (this.cfg.head === "fp") {
      return tf.losses.sigmoidCrossEntropy(batch.labels, logits);
    }
    return tf.losses.softmaxCrossEntropy(batch.labels, logits);
  }

  variables(): tf.Variable[] {
    const layers = [
      this.embed,
      this.seqEncoder,
      this.combiner1,
      this.combiner2,
      this.exampleEncoder,
      this.head,
    ];
    // LayerVariable hides the underlying tf.Variable behind a protected
    // field; read() returns the tensor but the optimizer needs the Variable.
    return layers.flatMap((l) =>
      l.trainableWeights.map((w) => (w as unknown as { val: tf.Variable }).val)
    );
  }

  /** cf/lcs: expected class value per row; fp: per-token probabilities. */
  readout(logits: tf.Tensor2D): tf.Tensor2D {
    if (this.cfg.head === "fp") {
      return tf.sigmoid(logits) as tf.Tensor2D;
    }
    const probs = tf.softmax(logits);
    const classes = tf.range(0, numClasses(this.cfg), 1, "float32");
    return tf.sum(tf.mul(probs, classes), 1, true) as tf.Tensor2D;
  }

  async save(dir: string): Promise<void> {
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(
      path.join(dir, "config.json"),
      JSON.stringify(this.cfg, Object.keys(this.cfg).sort(), 2) + "\n"
    );
    const weights = [];
    for (const v of this.variables()) {
      weights.push({
        name: v.name,
        shape: v.shape,
        data: Array.from(await v.data()),
      });
    }
    fs.writeFileSync(path.join(dir, "weights.json"), JSON.stringify(weights));
  }

  static load(dir: string): FitnessNet {
    const cfg = JSON.parse(
      fs.readFileSync(path.join(dir, "config.json"), "utf-8")
    ) as ModelConfig;
    const net = new FitnessNet(cfg);
    const stored = JSON.parse(
      fs.readFileSync(path.join(dir, "weights.json"), "utf-8")
    ) as { name: string; shape: number[]; data: number[] }[];
    const vars = net.variables();
    if (vars.length !== stored.length) {
      throw new Error(
        `artifact has ${stored.length} weight tensors, model needs ${vars.length}`
      );
    }
    for (let i = 0; i < vars.length; i++) {
      const w = stored[i];
      if (JSON.stringify(vars[i].shape) !== JSON.stringify(w.shape)) {
        throw new Error(`weight ${i} (${w.name}) has shape ${w.shape}, expected ${vars[i].shape}`);
      }
      vars[i].assign(tf.tensor(w.data, w.shape as number[], "float32"));
    }
    return net;
  }
}

/** Encode one example's sequences: [in, out, step_1..step_L] or [in, out]. */
function exampleRows(
  cfg: ModelConfig,
  pair: { in: Value; out: Value },
  trace: Value[] | null,
  candidate: number[] | null
): { values: number[][]; fids: number[][] } {
  const values: number[][] = [
    encodeValueSeq(pair.in, cfg.maxListLen),
    encodeValueSeq(pair.out, cfg.maxListLen),
  ];
  const fids: number[][] = [
    new Array(cfg.sigmaSize).fill(0),
    new Array(cfg.sigmaSize).fill(0),
  ];
  if (usesTraces(cfg)) {
    for (let k = 0; k < cfg.programLength; k++) {
      const step = trace && k < trace.length ? trace[k] : [];
      values.push(encodeValueSeq(step, cfg.maxListLen));
      const token = candidate && k < candidate.length ? candidate[k] : -1;
      fids.push(oneHot(token, cfg.sigmaSize));
    }
  }
  return { values, fids };
}

export interface EncodedInput {
  values: tf.Tensor4D;
  fids: tf.Tensor4D | null;
}

/** Build the model input for a batch of (io, candidate, traces) triples. */
export function encodeInputs(
  cfg: ModelConfig,
  ios: { in: Value; out: Value }[][],
  candidates: (number[] | null)[],
  traces: (Value[][] | null)[]
): EncodedInput {
  const b = ios.length;
  const m = ios[0].length;
  const s = seqCount(cfg);
  const t = cfg.maxListLen;
  if (ios.some((io) => io.length !== m)) {
    throw new Error("all rows in a batch must have the same example count");
  }
  const values = new Int32Array(b * m * s * t);
  const fids = usesTraces(cfg) ? new Float32Array(b * m * s * cfg.sigmaSize) : null;
  for (let i = 0; i < b; i++) {
    for (let j = 0; j < m; j++) {
      const trace = traces[i] ? traces[i]![j] ?? null : null;
      const rows = exampleRows(cfg, ios[i][j], trace, candidates[i]);
      for (let q = 0; q < s; q++) {
        values.set(rows.values[q], ((i * m + j) * s + q) * t);
        if (fids) {
          fids.set(rows.fids[q], ((i * m + j) * s + q) * cfg.sigmaSize);
        }
      }
    }
  }
  return {
    values: tf.tensor4d(values, [b, m, s, t], "int32"),
    fids: fids ? tf.tensor4d(fids, [b, m, s, cfg.sigmaSize]) : null,
  };
}

export function labelFor(cfg: ModelConfig, rec: TrainingRecord): number[] {
  if (cfg.head === "fp") {
    return rec.labels.membership.map((x) => (x ? 1 : 0));
  }
  const raw = cfg.head === "cf"
    ? rec.labels.cf
    : cfg.lcsMode === "substr"
      ? rec.labels.lcs_substr
      : rec.labels.lcs_subseq;
  const clamped = Math.max(0, Math.min(numClasses(cfg) - 1, raw));
  return oneHot(clamped, numClasses(cfg));
}

export function recordBatch(cfg: ModelConfig, records: TrainingRecord[]): Batch {
  const ios = records.map((r) => r.io);
  const candidates = records.map((r) => (usesTraces(cfg) ? r.candidate : null));
  const traces = records.map((r) => (usesTraces(cfg) ? r.traces : null));
  const encoded = encodeInputs(cfg, ios, candidates, traces);
  const labels = records.map((r) => labelFor(cfg, r));
  return {
    values: encoded.values,
    fids: encoded.fids,
    labels: tf.tensor2d(labels, [records.length, numClasses(cfg)]),
  };
}

export function disposeBatch(batch: Batch): void {
  batch.values.dispose();
  batch.fids?.dispose();
  batch.labels.dispose();
}
