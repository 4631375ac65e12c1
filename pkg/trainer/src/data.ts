/** Training-data records: one JSON object per line, with a .meta.json sidecar
 * carrying the registry fingerprint of the generator. */

import * as fs from "fs";

import { Value } from "./encode";

export interface IoPair {
  in: Value;
  out: Value;
}

export interface Labels {
  cf: number;
  lcs_subseq: number;
  lcs_substr: number;
  membership: number[];
}

export interface TrainingRecord {
  target: number[];
  candidate: number[];
  io: IoPair[];
  traces: Value[][];
  labels: Labels;
}

export interface DatasetMeta {
  registry_fnv1a?: string;
  sigma_size?: number;
  [key: string]: unknown;
}

function checkRecord(obj: unknown, lineno: number): TrainingRecord {
  const rec = obj as TrainingRecord;
  if (
    !rec ||
    !Array.isArray(rec.target) ||
    !Array.isArray(rec.candidate) ||
    !Array.isArray(rec.io) ||
    !Array.isArray(rec.traces) ||
    !rec.labels ||
    !Array.isArray(rec.labels.membership)
  ) {
    throw new Error(`line ${lineno}: not a training record`);
  }
  if (rec.traces.length !== rec.io.length) {
    throw new Error(`line ${lineno}: traces and io lengths differ`);
  }
  return rec;
}

export function readJsonl(path: string, limit?: number): TrainingRecord[] {
  const out: TrainingRecord[] = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    out.push(checkRecord(JSON.parse(line), i + 1));
    if (limit !== undefined && out.length >= limit) break;
  }
  if (out.length === 0) {
    throw new Error(`no records in ${path}`);
  }
  return out;
}

export function readMeta(dataPath: string): DatasetMeta | null {
  const metaPath = `${dataPath}.meta.json`;
  if (!fs.existsSync(metaPath)) return null;
  return JSON.parse(fs.readFileSync(metaPath, "utf-8")) as DatasetMeta;
}

/** Deterministic Fisher-Yates shuffle from a small linear-congruential stream. */
export function seededShuffle<T>(items: T[], seed: number): T[] {
  const out = items.slice();
  let state = (seed >>> 0) || 1;
  const next = () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}
