/**
 * The full loop through the Python harness's external interfaces:
 * write a canonical corpus, `compile` it with the harness CLI, train
 * here, write the prediction file, and let the `evaluate` verb score
 * it.  Nothing crosses the boundary except the three file formats.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import { readCompiled, toPredictions, writePredictions } from "../../src/corpus.js";
import {
  DEFAULT_CONFIG,
  encodeRecords,
  initModel,
  meanLoss,
  predict,
  train,
  TrainerConfig,
} from "../../src/model.js";
import { Rng } from "../../src/rng.js";
import { Vocab } from "../../src/vocab.js";

const FOODS = ["italian", "thai", "chinese", "british", "indian"];
const AREAS = ["north", "south", "east", "west"];

function goldDialogues(): object[] {
  const dialogues: object[] = [];
  let i = 0;
  for (const food of FOODS) {
    for (const area of AREAS) {
      dialogues.push({
        id: `mem-${i}`,
        dataset: "memtoy",
        domains: ["restaurant"],
        turns: [
          {
            index: 0,
            speaker: "speaker1",
            text: `i want ${food} food in the ${area}`,
            belief: [
              ["restaurant", "area", area],
              ["restaurant", "food", food],
            ],
          },
          { index: 1, speaker: "speaker2", text: `searching for ${food} places now` },
        ],
      });
      i++;
    }
  }
  return dialogues;
}

function harness(args: string[], cwd: string): string {
  return execFileSync("python3", ["-m", "dialokit.cli", ...args], {
    cwd,
    encoding: "utf-8",
  });
}

const CFG: TrainerConfig = {
  ...DEFAULT_CONFIG,
  width: 48,
  batchSize: 20,
  learningRate: 5e-3,
  seed: 11,
};

describe("compile -> train -> predict -> evaluate", () => {
  let dir: string;
  let goldPath: string;
  let compiledPath: string;

  beforeAll(() => {
    dir = mkdtempSync(join(tmpdir(), "trainer-e2e-"));
    goldPath = join(dir, "gold.jsonl");
    compiledPath = join(dir, "compiled.jsonl");
    const lines = goldDialogues().map((d) => JSON.stringify(d));
    writeFileSync(goldPath, lines.join("\n") + "\n", "utf-8");
    const stdout = harness(
      ["compile", "--tasks", "dst", "--in", goldPath, "--out", compiledPath, "--seed", "1"],
      dir,
    );
    expect(stdout).toContain("dst: 20 records");
  });

  it("halves the mean loss within 200 training steps", () => {
    const records = readCompiled(compiledPath);
    expect(records).toHaveLength(20);
    const cfg = { ...CFG, steps: 200 };
    const vocab = Vocab.build(records.flatMap((r) => [r.source_text, r.target_text]),
                              cfg.vocabSize);
    const { encoded } = encodeRecords(records, vocab, cfg.maxSeqLen);
    const initial = meanLoss(initModel(cfg, vocab, new Rng(cfg.seed)), encoded);
    const { model } = train(records, cfg);
    const final = meanLoss(model, encoded);
    expect(final).toBeLessThanOrEqual(0.5 * initial);
  });

  it("memorizes the 20-record corpus and the evaluate verb reports JGA 100.0", () => {
    const records = readCompiled(compiledPath);
    const { model } = train(records, { ...CFG, steps: 600 });

    const texts = predict(model, records.map((r) => r.source_text));
    const predsPath = join(dir, "preds.jsonl");
    writePredictions(toPredictions(records.map((r) => r.id), texts), predsPath);

    const reportPath = join(dir, "report.json");
    const stdout = harness(
      ["evaluate", "--task", "dst", "--gold", goldPath, "--pred", predsPath,
       "--out", reportPath],
      dir,
    );
    expect(stdout).toContain("jga");
    const report = JSON.parse(readFileSync(reportPath, "utf-8"));
    expect(report.values.jga).toBe(100.0);
    expect(report.counts.jga).toEqual([20, 20]);
    expect(report.tallies.missing_predictions).toBe(0);
  });
});
