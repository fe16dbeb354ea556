// Session state: the loaded model, the editable parameters (weights per
// functional group, prescribed strut lengths, seed), and the last result.
// Edits always produce a new state object and never touch the last result;
// `dirty` flags parameters changed since that result was computed.

import type { ModelFile, SolveRequest, SolveResult } from './types';
import { isStrut } from './types';

export interface WeightGroup {
  functionalId: number;
  variant: string;
  label: string;
  weight: number;       // current edited value
  defaultWeight: number;
  memberCount: number;
}

export interface StrutInput {
  memberId: number;
  length: number;       // current edited value, always > 0
  defaultLength: number;
}

export interface SessionState {
  model: ModelFile;
  groups: WeightGroup[];
  struts: StrutInput[];
  overrides: Record<number, number>; // advanced: per-member weight override
  seed: number;
  lastResult: SolveResult | null;
  dirty: boolean;
}

function weightOf(params: Record<string, number>, variant: string): number | null {
  if (variant === 'power_length' || variant === 'power_area') return params.w;
  if (variant === 'spring_length') return params.k;
  return null; // plain_area has nothing to edit
}

function groupLabel(variant: string, params: Record<string, number>, count: number): string {
  const what = variant.endsWith('area') ? 'elements' : 'cables';
  const power = params.p !== undefined ? `^${params.p}` : '';
  return `${variant}${power} (${count} ${what})`;
}

export function createSession(model: ModelFile, seed = 0): SessionState {
  const usage = new Map<number, number>();
  for (const member of model.members) {
    if (!isStrut(member)) {
      usage.set(member.functional_id, (usage.get(member.functional_id) ?? 0) + 1);
    }
  }
  for (const element of model.elements) {
    usage.set(element.functional_id, (usage.get(element.functional_id) ?? 0) + 1);
  }

  const groups: WeightGroup[] = [];
  for (const entry of model.functionals) {
    const weight = weightOf(entry.params, entry.variant);
    const count = usage.get(entry.id) ?? 0;
    if (weight === null || count === 0) continue;
    groups.push({
      functionalId: entry.id,
      variant: entry.variant,
      label: groupLabel(entry.variant, entry.params, count),
      weight,
      defaultWeight: weight,
      memberCount: count,
    });
  }

  const struts: StrutInput[] = model.members.filter(isStrut).map((member) => ({
    memberId: member.id,
    length: member.prescribed_length,
    defaultLength: member.prescribed_length,
  }));

  return { model, groups, struts, overrides: {}, seed, lastResult: null, dirty: true };
}

export function setGroupWeight(state: SessionState, functionalId: number,
                               weight: number): SessionState {
  if (!(weight > 0) || !Number.isFinite(weight)) {
    throw new Error(`weight must be > 0, got ${weight}`);
  }
  const groups = state.groups.map((group) =>
    group.functionalId === functionalId ? { ...group, weight } : group);
  return { ...state, groups, dirty: true };
}

export function setStrutLength(state: SessionState, memberId: number,
                               length: number): SessionState {
  if (!(length > 0) || !Number.isFinite(length)) {
    throw new Error(`prescribed length must be > 0, got ${length}`);
  }
  const struts = state.struts.map((strut) =>
    strut.memberId === memberId ? { ...strut, length } : strut);
  return { ...state, struts, dirty: true };
}

export function setMemberOverride(state: SessionState, memberId: number,
                                  weight: number | null): SessionState {
  const overrides = { ...state.overrides };
  if (weight === null) {
    delete overrides[memberId];
  } else {
    if (!(weight > 0) || !Number.isFinite(weight)) {
      throw new Error(`weight must be > 0, got ${weight}`);
    }
    overrides[memberId] = weight;
  }
  return { ...state, overrides, dirty: true };
}

export function setSeed(state: SessionState, seed: number): SessionState {
  return { ...state, seed: Math.trunc(seed), dirty: true };
}

export function markSolved(state: SessionState, result: SolveResult): SessionState {
  return { ...state, lastResult: result, dirty: false };
}

/**
 * Materialize the edited parameters into a fresh model file. Per-member
 * overrides split the member off its group into a dedicated functional entry.
 */
export function editedModel(state: SessionState): ModelFile {
  const model: ModelFile = JSON.parse(JSON.stringify(state.model));
  for (const group of state.groups) {
    const entry = model.functionals.find((f) => f.id === group.functionalId);
    if (!entry) continue;
    if (entry.variant === 'spring_length') {
      entry.params.k = group.weight;
    } else {
      entry.params.w = group.weight;
    }
  }
  const byLength = new Map(state.struts.map((s) => [s.memberId, s.length]));
  for (const member of model.members) {
    if (isStrut(member)) {
      const edited = byLength.get(member.id);
      if (edited !== undefined) member.prescribed_length = edited;
    }
  }
  let nextFunctionalId = Math.max(0, ...model.functionals.map((f) => f.id)) + 1;
  for (const [memberIdText, weight] of Object.entries(state.overrides)) {
    const memberId = Number(memberIdText);
    const member = model.members.find((m) => m.id === memberId);
    if (!member || isStrut(member)) continue;
    const base = model.functionals.find((f) => f.id === member.functional_id);
    if (!base) continue;
    const clone = { id: nextFunctionalId++, variant: base.variant,
                    params: { ...base.params } };
    if (clone.variant === 'spring_length') {
      clone.params.k = weight;
    } else {
      clone.params.w = weight;
    }
    model.functionals.push(clone);
    member.functional_id = clone.id;
  }
  return model;
}

export function buildSolveRequest(state: SessionState): SolveRequest {
  return {
    mode: 'formfind',
    model: editedModel(state),
    options: { seed: state.seed, init: { kind: 'random', range: 2.5 } },
  };
}
