/**
 * Teacher-forcing objective: the negative sum of log-probabilities the
 * model assigns to the reference target tokens.  A probability floor
 * keeps the loss finite when the model assigns (numerically) zero mass
 * to a target token.
 */

export const PROB_FLOOR = 1e-9;

/**
 * One distribution per target position; each must sum to 1 within 1e-6.
 * An empty target scores 0.
 */
export function mleLoss(distributions: number[][], targets: number[]): number {
  if (distributions.length !== targets.length) {
    throw new Error(
      `need one distribution per target position: got ${distributions.length} vs ${targets.length}`,
    );
  }
  let loss = 0;
  for (let t = 0; t < targets.length; t++) {
    const dist = distributions[t];
    let mass = 0;
    for (const p of dist) mass += p;
    if (Math.abs(mass - 1) > 1e-6) {
      throw new Error(`distribution at position ${t} sums to ${mass}, not 1`);
    }
    const target = targets[t];
    if (target < 0 || target >= dist.length) {
      throw new Error(`target ${target} outside vocabulary of size ${dist.length}`);
    }
    loss -= Math.log(Math.max(dist[target], PROB_FLOOR));
  }
  return loss;
}
