/**
 * Trainer command line.
 *
 *   node dist/cli.js train   --corpus compiled.jsonl --config cfg.txt --out ckpt.json
 *   node dist/cli.js predict --ckpt ckpt.json --in compiled.jsonl --out preds.jsonl
 *
 * `train` consumes the compiled corpus format; `predict` writes the
 * prediction file format the evaluate verb scores.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { readCompiled, readConfig, toPredictions, writePredictions } from "./corpus.js";
import { DEFAULT_CONFIG, fromCheckpoint, predict, toCheckpoint, train } from "./model.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad arguments near ${key}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (!value) throw new Error(`missing required flag --${name}`);
  return value;
}

export function main(argv: string[]): number {
  const [verb, ...rest] = argv;
  try {
    if (verb === "train") {
      const flags = parseFlags(rest);
      const records = readCompiled(need(flags, "corpus"));
      const cfg = flags.has("config") ? readConfig(flags.get("config")!) : { ...DEFAULT_CONFIG };
      const logEvery = Math.max(1, Math.floor(cfg.steps / 10));
      const result = train(records, cfg, (step, loss) => {
        if (step === 1 || step % logEvery === 0) {
          console.log(`step ${step}/${cfg.steps} | loss ${loss.toFixed(4)}`);
        }
      });
      if (result.truncated > 0) {
        console.log(`${result.truncated} sources truncated to ${cfg.maxSeqLen} tokens`);
      }
      writeFileSync(need(flags, "out"), JSON.stringify(toCheckpoint(result.model)), "utf-8");
      console.log(`checkpoint written (${result.model.vocab.size} word vocabulary)`);
      return 0;
    }
    if (verb === "predict") {
      const flags = parseFlags(rest);
      const model = fromCheckpoint(JSON.parse(readFileSync(need(flags, "ckpt"), "utf-8")));
      const records = readCompiled(need(flags, "in"));
      const texts = predict(model, records.map((r) => r.source_text));
      writePredictions(toPredictions(records.map((r) => r.id), texts), need(flags, "out"));
      console.log(`${records.length} predictions written`);
      return 0;
    }
    console.error("usage: cli.js train|predict [flags]");
    return 1;
  } catch (err) {
    console.error(`trainer: error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
