/**
 * Word-level vocabulary.  The compiled corpus is plain prompted text,
 * so whitespace tokens are the natural unit at toy scale; anything
 * outside the vocabulary maps to the unknown symbol and never fails.
 */

export const PAD = "<pad>";
export const BOS = "<bos>";
export const EOS = "<eos>";
export const UNK = "<unk>";
export const SPECIALS = [PAD, BOS, EOS, UNK];

export class Vocab {
  readonly tokens: string[];
  private readonly index: Map<string, number>;

  constructor(tokens: string[]) {
    this.tokens = tokens;
    this.index = new Map(tokens.map((tok, i) => [tok, i]));
    for (const special of SPECIALS) {
      if (!this.index.has(special)) throw new Error(`vocabulary lacks ${special}`);
    }
  }

  get size(): number {
    return this.tokens.length;
  }

  get bos(): number {
    return this.index.get(BOS)!;
  }

  get eos(): number {
    return this.index.get(EOS)!;
  }

  get unk(): number {
    return this.index.get(UNK)!;
  }

  encode(text: string): number[] {
    return split(text).map((tok) => this.index.get(tok) ?? this.unk);
  }

  decode(ids: number[]): string {
    const words: string[] = [];
    for (const id of ids) {
      const tok = this.tokens[id];
      if (tok === EOS || tok === PAD || tok === BOS) continue;
      words.push(tok);
    }
    return words.join(" ");
  }

  /** Keep the most frequent words up to `maxSize` (specials included). */
  static build(texts: string[], maxSize: number): Vocab {
    const counts = new Map<string, number>();
    for (const text of texts) {
      for (const tok of split(text)) {
        counts.set(tok, (counts.get(tok) ?? 0) + 1);
      }
    }
    const words = [...counts.entries()]
      .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
      .slice(0, Math.max(0, maxSize - SPECIALS.length))
      .map(([tok]) => tok);
    return new Vocab([...SPECIALS, ...words]);
  }
}

export function split(text: string): string[] {
  return text.split(/\s+/).filter((t) => t.length > 0);
}
