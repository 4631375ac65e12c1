/** Integer-value vocabulary and sequence padding for the model inputs.
 *
 * Values in [-256, 256] map to dedicated symbols after PAD and UNK; anything
 * outside the window becomes UNK. Integer values travel as single-element
 * sequences; lists are truncated or right-padded to a fixed width.
 */

export const PAD = 0;
export const UNK = 1;
export const VOCAB_MIN = -256;
export const VOCAB_MAX = 256;
export const VOCAB_SIZE = 2 + (VOCAB_MAX - VOCAB_MIN + 1);

export type Value = number | number[];

export function encodeInt(v: number): number {
  if (!Number.isInteger(v) || v < VOCAB_MIN || v > VOCAB_MAX) {
    return UNK;
  }
  return v - VOCAB_MIN + 2;
}

export function encodeValueSeq(value: Value, maxLen: number): number[] {
  const items = typeof value === "number" ? [value] : value;
  const out = new Array<number>(maxLen).fill(PAD);
  const n = Math.min(items.length, maxLen);
  for (let i = 0; i < n; i++) {
    out[i] = encodeInt(items[i]);
  }
  return out;
}

export function oneHot(index: number, size: number): number[] {
  const out = new Array<number>(size).fill(0);
  if (index >= 0 && index < size) {
    out[index] = 1;
  }
  return out;
}
