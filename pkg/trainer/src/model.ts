/**
 * A tiny seq2seq model small enough that every gradient is derived by
 * hand (and checked against finite differences in the tests):
 *
 *   encoder   c = mean of source token embeddings
 *   decoder   x_t = [c ; E(y_{t-1}) ; P(t)]
 *             h   = tanh(W_l ... tanh(W_1 x_t + b_1) ... + b_l)
 *             z_t = V h + b_out
 *   loss      -sum_t log softmax(z_t)[y_t]      (teacher forcing)
 *
 * Word-level vocabulary, Adam updates, greedy decoding.  Everything is
 * driven by a seeded PRNG, so a (corpus, config, seed) triple always
 * reproduces the same loss curve and the same checkpoint.
 */

import { PROB_FLOOR } from "./loss.js";
import { Rng } from "./rng.js";
import { Vocab, split } from "./vocab.js";

export interface TrainerConfig {
  vocabSize: number;
  width: number;
  layers: number;
  learningRate: number;
  batchSize: number;
  steps: number;
  maxSeqLen: number;
  seed: number;
}

export const DEFAULT_CONFIG: TrainerConfig = {
  vocabSize: 4000,
  width: 64,
  layers: 1,
  learningRate: 3e-3,
  batchSize: 16,
  steps: 200,
  maxSeqLen: 256,
  seed: 0,
};

export function validateConfig(cfg: TrainerConfig): void {
  for (const [key, value] of Object.entries(cfg)) {
    if (key !== "seed" && value <= 0) throw new Error(`config ${key} must be positive, got ${value}`);
    if (!Number.isFinite(value)) throw new Error(`config ${key} must be finite`);
  }
}

export interface Tensor {
  rows: number;
  cols: number; // 1 for vectors
  data: Float64Array;
}

function tensor(rows: number, cols: number): Tensor {
  return { rows, cols, data: new Float64Array(rows * cols) };
}

function gaussInit(t: Tensor, rng: Rng, scale: number): void {
  for (let i = 0; i < t.data.length; i++) t.data[i] = rng.gauss() * scale;
}

export interface Model {
  config: TrainerConfig;
  vocab: Vocab;
  embed: Tensor; // V x d
  pos: Tensor; // maxSeqLen x d
  hidden: Tensor[]; // layer weights: first d x 3d, rest d x d
  bias: Tensor[]; // layer biases: d
  out: Tensor; // V x d
  outBias: Tensor; // V
  maxTargetLen: number;
}

export function allTensors(model: Model): Tensor[] {
  return [model.embed, model.pos, ...model.hidden, ...model.bias, model.out, model.outBias];
}

export function initModel(cfg: TrainerConfig, vocab: Vocab, rng: Rng): Model {
  const d = cfg.width;
  const hidden: Tensor[] = [];
  const bias: Tensor[] = [];
  for (let l = 0; l < cfg.layers; l++) {
    hidden.push(tensor(d, l === 0 ? 3 * d : d));
    bias.push(tensor(d, 1));
  }
  const model: Model = {
    config: cfg,
    vocab,
    embed: tensor(vocab.size, d),
    pos: tensor(cfg.maxSeqLen, d),
    hidden,
    bias,
    out: tensor(vocab.size, d),
    outBias: tensor(vocab.size, 1),
    maxTargetLen: 8,
  };
  gaussInit(model.embed, rng, 0.1);
  gaussInit(model.pos, rng, 0.1);
  for (const w of hidden) gaussInit(w, rng, 0.1);
  gaussInit(model.out, rng, 0.1);
  return model;
}

export interface EncodedRecord {
  id: string;
  task: string;
  source: number[];
  target: number[]; // ends with EOS
}

export interface EncodeStats {
  truncated: number;
}

/** Map compiled records onto vocabulary ids, truncating long sources
 * from the left so the most recent context survives. */
export function encodeRecords(
  records: { id: string; task: string; source_text: string; target_text: string }[],
  vocab: Vocab,
  maxSeqLen: number,
): { encoded: EncodedRecord[]; stats: EncodeStats } {
  let truncated = 0;
  const encoded = records.map((r) => {
    let source = vocab.encode(r.source_text);
    if (source.length > maxSeqLen) {
      source = source.slice(source.length - maxSeqLen);
      truncated++;
    }
    const target = [...vocab.encode(r.target_text), vocab.eos];
    return { id: r.id, task: r.task, source, target };
  });
  return { encoded, stats: { truncated } };
}

// ---------------------------------------------------------------------------
// Forward / backward

function contextVector(model: Model, source: number[]): Float64Array {
  const d = model.config.width;
  const c = new Float64Array(d);
  if (source.length === 0) return c;
  for (const id of source) {
    const base = id * d;
    for (let k = 0; k < d; k++) c[k] += model.embed.data[base + k];
  }
  for (let k = 0; k < d; k++) c[k] /= source.length;
  return c;
}

function softmaxInPlace(z: Float64Array): void {
  let max = -Infinity;
  for (const v of z) if (v > max) max = v;
  let sum = 0;
  for (let i = 0; i < z.length; i++) {
    z[i] = Math.exp(z[i] - max);
    sum += z[i];
  }
  for (let i = 0; i < z.length; i++) z[i] /= sum;
}

interface StepTrace {
  x: Float64Array; // 3d input
  hs: Float64Array[]; // activations per layer
  probs: Float64Array; // softmax output
  prev: number;
  posRow: number;
}

function decoderStep(model: Model, c: Float64Array, prev: number, t: number): StepTrace {
  const d = model.config.width;
  const x = new Float64Array(3 * d);
  const posRow = Math.min(t, model.pos.rows - 1);
  x.set(c, 0);
  x.set(model.embed.data.subarray(prev * d, prev * d + d), d);
  x.set(model.pos.data.subarray(posRow * d, posRow * d + d), 2 * d);

  const hs: Float64Array[] = [];
  let input = x;
  for (let l = 0; l < model.hidden.length; l++) {
    const w = model.hidden[l];
    const b = model.bias[l];
    const h = new Float64Array(d);
    for (let i = 0; i < d; i++) {
      let acc = b.data[i];
      const row = i * w.cols;
      for (let k = 0; k < w.cols; k++) acc += w.data[row + k] * input[k];
      h[i] = Math.tanh(acc);
    }
    hs.push(h);
    input = h;
  }

  const vSize = model.vocab.size;
  const probs = new Float64Array(vSize);
  const top = hs[hs.length - 1];
  for (let j = 0; j < vSize; j++) {
    let acc = model.outBias.data[j];
    const row = j * d;
    for (let k = 0; k < d; k++) acc += model.out.data[row + k] * top[k];
    probs[j] = acc;
  }
  softmaxInPlace(probs);
  return { x, hs, probs, prev, posRow };
}

/** Teacher-forced loss of one record: negative log-likelihood summed
 * over target positions. */
export function recordLoss(model: Model, record: EncodedRecord): number {
  const c = contextVector(model, record.source);
  let loss = 0;
  for (let t = 0; t < record.target.length; t++) {
    const prev = t === 0 ? model.vocab.bos : record.target[t - 1];
    const trace = decoderStep(model, c, prev, t);
    loss -= Math.log(Math.max(trace.probs[record.target[t]], PROB_FLOOR));
  }
  return loss;
}

export type Grads = Map<Tensor, Float64Array>;

export function zeroGrads(model: Model): Grads {
  const grads: Grads = new Map();
  for (const t of allTensors(model)) grads.set(t, new Float64Array(t.data.length));
  return grads;
}

/** Accumulate d(loss)/d(params) for one record into `grads`; returns the loss. */
export function recordBackward(model: Model, record: EncodedRecord, grads: Grads): number {
  const d = model.config.width;
  const c = contextVector(model, record.source);
  const dC = new Float64Array(d);
  const gEmbed = grads.get(model.embed)!;
  const gPos = grads.get(model.pos)!;
  const gOut = grads.get(model.out)!;
  const gOutBias = grads.get(model.outBias)!;

  let loss = 0;
  for (let t = 0; t < record.target.length; t++) {
    const prev = t === 0 ? model.vocab.bos : record.target[t - 1];
    const trace = decoderStep(model, c, prev, t);
    const target = record.target[t];
    const pTarget = trace.probs[target];
    loss -= Math.log(Math.max(pTarget, PROB_FLOOR));
    if (pTarget <= PROB_FLOOR) continue; // loss saturated at the floor: zero gradient

    // d loss / d logits = probs - onehot(target)
    const dZ = trace.probs; // reuse; trace is not needed after this
    dZ[target] -= 1;

    // output layer
    const top = trace.hs[trace.hs.length - 1];
    const dTop = new Float64Array(d);
    for (let j = 0; j < model.vocab.size; j++) {
      const g = dZ[j];
      if (g === 0) continue;
      gOutBias[j] += g;
      const row = j * d;
      for (let k = 0; k < d; k++) {
        gOut[row + k] += g * top[k];
        dTop[k] += model.out.data[row + k] * g;
      }
    }

    // hidden stack, last to first
    let dH = dTop;
    for (let l = model.hidden.length - 1; l >= 0; l--) {
      const w = model.hidden[l];
      const gW = grads.get(w)!;
      const gB = grads.get(model.bias[l])!;
      const h = trace.hs[l];
      const input = l === 0 ? trace.x : trace.hs[l - 1];
      const dA = new Float64Array(d);
      for (let i = 0; i < d; i++) dA[i] = dH[i] * (1 - h[i] * h[i]);
      const dIn = new Float64Array(w.cols);
      for (let i = 0; i < d; i++) {
        const g = dA[i];
        if (g === 0) continue;
        gB[i] += g;
        const row = i * w.cols;
        for (let k = 0; k < w.cols; k++) {
          gW[row + k] += g * input[k];
          dIn[k] += w.data[row + k] * g;
        }
      }
      dH = dIn;
    }

    // dH is now d loss / d x_t = [dc ; dE(prev) ; dP(pos)]
    for (let k = 0; k < d; k++) dC[k] += dH[k];
    const prevBase = trace.prev * d;
    for (let k = 0; k < d; k++) gEmbed[prevBase + k] += dH[d + k];
    const posBase = trace.posRow * d;
    for (let k = 0; k < d; k++) gPos[posBase + k] += dH[2 * d + k];
  }

  // context is the mean of source embeddings
  if (record.source.length > 0) {
    const inv = 1 / record.source.length;
    for (const id of record.source) {
      const base = id * d;
      for (let k = 0; k < d; k++) gEmbed[base + k] += dC[k] * inv;
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Training

export interface TrainResult {
  model: Model;
  lossCurve: number[]; // mean batch loss per step
  truncated: number;
}

export function meanLoss(model: Model, records: EncodedRecord[]): number {
  if (records.length === 0) throw new Error("cannot evaluate an empty corpus");
  let total = 0;
  for (const r of records) total += recordLoss(model, r);
  return total / records.length;
}

export function train(
  records: { id: string; task: string; source_text: string; target_text: string }[],
  cfg: TrainerConfig,
  onStep?: (step: number, loss: number) => void,
): TrainResult {
  validateConfig(cfg);
  if (records.length === 0) throw new Error("cannot train on an empty corpus");

  const vocab = Vocab.build(
    records.flatMap((r) => [r.source_text, r.target_text]),
    cfg.vocabSize,
  );
  const { encoded, stats } = encodeRecords(records, vocab, cfg.maxSeqLen);
  const rng = new Rng(cfg.seed);
  const model = initModel(cfg, vocab, rng);
  model.maxTargetLen = Math.max(...encoded.map((r) => r.target.length), 4);

  // Adam state, one moment pair per tensor
  const tensors = allTensors(model);
  const m = tensors.map((t) => new Float64Array(t.data.length));
  const v = tensors.map((t) => new Float64Array(t.data.length));
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;

  const order = encoded.map((_, i) => i);
  rng.shuffle(order);
  let cursor = 0;
  const lossCurve: number[] = [];

  for (let step = 1; step <= cfg.steps; step++) {
    const grads = zeroGrads(model);
    let batchLoss = 0;
    const batch = Math.min(cfg.batchSize, encoded.length);
    for (let b = 0; b < batch; b++) {
      if (cursor === order.length) {
        rng.shuffle(order);
        cursor = 0;
      }
      batchLoss += recordBackward(model, encoded[order[cursor++]], grads);
    }
    batchLoss /= batch;
    lossCurve.push(batchLoss);

    for (let ti = 0; ti < tensors.length; ti++) {
      const theta = tensors[ti].data;
      const g = grads.get(tensors[ti])!;
      const mi = m[ti];
      const vi = v[ti];
      const c1 = 1 - Math.pow(beta1, step);
      const c2 = 1 - Math.pow(beta2, step);
      for (let i = 0; i < theta.length; i++) {
        const grad = g[i] / batch;
        mi[i] = beta1 * mi[i] + (1 - beta1) * grad;
        vi[i] = beta2 * vi[i] + (1 - beta2) * grad * grad;
        theta[i] -= (cfg.learningRate * (mi[i] / c1)) / (Math.sqrt(vi[i] / c2) + eps);
      }
    }
    if (onStep) onStep(step, batchLoss);
  }
  return { model, lossCurve, truncated: stats.truncated };
}

// ---------------------------------------------------------------------------
// Decoding

export function greedyDecode(model: Model, sourceText: string): string {
  let source = model.vocab.encode(sourceText);
  if (source.length > model.config.maxSeqLen) {
    source = source.slice(source.length - model.config.maxSeqLen);
  }
  const c = contextVector(model, source);
  const out: number[] = [];
  const limit = Math.min(model.maxTargetLen + 4, model.config.maxSeqLen);
  let prev = model.vocab.bos;
  for (let t = 0; t < limit; t++) {
    const trace = decoderStep(model, c, prev, t);
    let best = 0;
    for (let j = 1; j < trace.probs.length; j++) {
      if (trace.probs[j] > trace.probs[best]) best = j;
    }
    if (best === model.vocab.eos) break;
    out.push(best);
    prev = best;
  }
  return model.vocab.decode(out);
}

export function predict(model: Model, sourceTexts: string[]): string[] {
  return sourceTexts.map((text) => greedyDecode(model, text));
}

// ---------------------------------------------------------------------------
// Checkpoints

export interface CheckpointJson {
  config: TrainerConfig;
  vocab: string[];
  maxTargetLen: number;
  tensors: Record<string, number[]>;
}

function tensorNames(model: Model): [string, Tensor][] {
  const names: [string, Tensor][] = [
    ["embed", model.embed],
    ["pos", model.pos],
    ["out", model.out],
    ["out_bias", model.outBias],
  ];
  model.hidden.forEach((w, l) => names.push([`hidden_${l}`, w]));
  model.bias.forEach((b, l) => names.push([`bias_${l}`, b]));
  return names;
}

export function toCheckpoint(model: Model): CheckpointJson {
  const tensors: Record<string, number[]> = {};
  for (const [name, t] of tensorNames(model)) tensors[name] = [...t.data];
  return {
    config: model.config,
    vocab: [...model.vocab.tokens],
    maxTargetLen: model.maxTargetLen,
    tensors,
  };
}

export function fromCheckpoint(raw: CheckpointJson): Model {
  validateConfig(raw.config);
  const vocab = new Vocab(raw.vocab);
  const model = initModel(raw.config, vocab, new Rng(raw.config.seed));
  model.maxTargetLen = raw.maxTargetLen;
  for (const [name, t] of tensorNames(model)) {
    const data = raw.tensors[name];
    if (!data || data.length !== t.data.length) {
      throw new Error(`checkpoint tensor ${name} missing or wrong size`);
    }
    t.data.set(data);
  }
  return model;
}

export { split };
