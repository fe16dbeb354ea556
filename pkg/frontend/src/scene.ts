// Pure scene-model construction: SolveResult + ModelFile -> typed arrays the
// viewer hands to the GPU. No three.js here, so this logic is testable
// headless and the browser layer stays a thin adapter.

import { forceColor, NEUTRAL, type Rgb } from './colors';
import type { ModelFile, SolveResult, Vec3 } from './types';
import { isStrut } from './types';

export interface MemberVisual {
  memberId: number;
  role: 'cable' | 'strut';
  force: number | null;
  color: Rgb;
}

export interface SceneModel {
  // one segment (2 vertices x 3 coords) per member, colors per vertex
  segmentPositions: Float32Array;
  segmentColors: Float32Array;
  members: MemberVisual[];
  // triangle soup (3 vertices x 3 coords per element)
  trianglePositions: Float32Array;
  fixedMarkers: Float32Array;
  readouts: {
    converged: boolean | null;
    energy: number | null;
    residual: number | null;
    iterations: number | null;
  };
  boundsRadius: number;
}

/** Node positions with the solved free coordinates merged over the model. */
export function mergedPositions(model: ModelFile, coords: number[] | null): Vec3[] {
  const positions = model.nodes.map((node) => [...node.xyz] as Vec3);
  if (coords) {
    const free = model.nodes.filter((node) => !node.fixed).map((node) => node.id);
    if (coords.length !== free.length * 3) {
      throw new Error(`coords length ${coords.length} does not match `
        + `${free.length} free nodes`);
    }
    free.forEach((nodeId, row) => {
      positions[nodeId] = [coords[3 * row], coords[3 * row + 1], coords[3 * row + 2]];
    });
  }
  return positions;
}

export function buildSceneModel(model: ModelFile, result: SolveResult | null): SceneModel {
  const positions = mergedPositions(model, result ? result.coords : null);

  // member forces in model order: cables draw from member_forces, struts
  // from the recovered multipliers
  const forces: (number | null)[] = [];
  let cableRow = 0;
  let strutRow = 0;
  for (const member of model.members) {
    if (!result) {
      forces.push(null);
    } else if (isStrut(member)) {
      forces.push(result.forces.strut_multipliers[strutRow++] ?? null);
    } else {
      forces.push(result.forces.member_forces[cableRow++] ?? null);
    }
  }
  const scale = Math.max(...forces.map((f) => (f === null ? 0 : Math.abs(f))), 0);

  const segmentPositions = new Float32Array(model.members.length * 6);
  const segmentColors = new Float32Array(model.members.length * 6);
  const members: MemberVisual[] = [];
  model.members.forEach((member, row) => {
    const [a, b] = member.endpoints;
    segmentPositions.set(positions[a], row * 6);
    segmentPositions.set(positions[b], row * 6 + 3);
    const force = forces[row];
    const color = force === null ? NEUTRAL : forceColor(force, scale);
    segmentColors.set(color, row * 6);
    segmentColors.set(color, row * 6 + 3);
    members.push({ memberId: member.id, role: member.role, force, color });
  });

  const trianglePositions = new Float32Array(model.elements.length * 9);
  model.elements.forEach((element, row) => {
    element.vertices.forEach((vertex, corner) => {
      trianglePositions.set(positions[vertex], row * 9 + corner * 3);
    });
  });

  const fixedNodes = model.nodes.filter((node) => node.fixed);
  const fixedMarkers = new Float32Array(fixedNodes.length * 3);
  fixedNodes.forEach((node, row) => fixedMarkers.set(positions[node.id], row * 3));

  let boundsRadius = 1;
  for (const p of positions) {
    boundsRadius = Math.max(boundsRadius, Math.hypot(p[0], p[1], p[2]));
  }

  return {
    segmentPositions,
    segmentColors,
    members,
    trianglePositions,
    fixedMarkers,
    readouts: {
      converged: result ? result.converged : null,
      energy: result ? result.energy : null,
      residual: result ? result.residual_norm : null,
      iterations: result ? result.iterations : null,
    },
    boundsRadius,
  };
}
