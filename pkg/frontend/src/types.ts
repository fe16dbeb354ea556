// Wire types mirroring the tensiform/1 model format and the solve API.

export type Vec3 = [number, number, number];

export interface NodeEntry {
  id: number;
  xyz: Vec3;
  fixed: boolean;
}

export interface FunctionalEntry {
  id: number;
  variant: 'power_length' | 'spring_length' | 'power_area' | 'plain_area';
  params: Record<string, number>;
}

export interface CableEntry {
  id: number;
  endpoints: [number, number];
  role: 'cable';
  functional_id: number;
}

export interface StrutEntry {
  id: number;
  endpoints: [number, number];
  role: 'strut';
  prescribed_length: number;
}

export type MemberEntry = CableEntry | StrutEntry;

export interface ElementEntry {
  id: number;
  vertices: [number, number, number];
  functional_id: number;
}

export interface ModelFile {
  version: string;
  nodes: NodeEntry[];
  functionals: FunctionalEntry[];
  members: MemberEntry[];
  elements: ElementEntry[];
}

export interface GeneralizedForces {
  member_forces: number[];
  element_stresses: number[];
  strut_multipliers: number[];
}

export interface SolveResult {
  version: string;
  mode: string;
  seed: number | null;
  converged: boolean;
  energy: number;
  iterations: number;
  residual_norm: number;
  residual_rel?: number;
  constraint_violation: number;
  coords: number[];
  forces: GeneralizedForces;
  trace: [number, number][];
}

export interface BatchResult {
  mode: 'batch';
  results: SolveResult[];
  energies: number[];
}

export interface FixtureInfo {
  name: string;
  description: string;
  params: Record<string, number>;
}

export interface SolveOptionsWire {
  seed?: number;
  gradient_tolerance?: number;
  max_iterations?: number;
  method?: 'descent' | 'dynrelax';
  init?: { kind: 'random'; range?: number } | { kind: 'model' } | { kind: 'given'; coords: number[] };
  wall_clock_limit?: number;
}

export interface SolveRequest {
  mode: 'linear' | 'formfind' | 'compare';
  model: ModelFile;
  options?: SolveOptionsWire;
  functionals?: string[];
  force_densities?: number[];
}

export interface BatchRequest {
  model: ModelFile;
  options?: SolveOptionsWire;
  seeds?: number[];
  n_seeds?: number;
}

export function isStrut(member: MemberEntry): member is StrutEntry {
  return member.role === 'strut';
}
