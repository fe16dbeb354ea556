// Group batch-solve energies into distinct local-minimum clusters so the
// seed explorer can list them for selection.

export interface EnergyCluster {
  energy: number;     // representative (lowest) energy in the cluster
  seeds: number[];    // seeds that landed in this basin, ascending
  count: number;
}

/**
 * Cluster energies that agree to within `relTol` of the global minimum
 * magnitude. Input order follows the seeds array; output is sorted by energy.
 */
export function clusterEnergies(seeds: number[], energies: number[],
                                relTol = 1e-3): EnergyCluster[] {
  if (seeds.length !== energies.length) {
    throw new Error('seeds and energies must align');
  }
  const order = energies.map((energy, i) => ({ energy, seed: seeds[i] }))
    .filter((e) => Number.isFinite(e.energy))
    .sort((a, b) => a.energy - b.energy);
  if (order.length === 0) return [];

  const clusters: EnergyCluster[] = [];
  for (const { energy, seed } of order) {
    const last = clusters[clusters.length - 1];
    if (last && energy - last.energy <= relTol * Math.max(Math.abs(last.energy), 1e-300)) {
      last.seeds.push(seed);
      last.count += 1;
    } else {
      clusters.push({ energy, seeds: [seed], count: 1 });
    }
  }
  return clusters;
}
