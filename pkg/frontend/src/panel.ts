// Parameter panel: fixture picker, weight-group sliders, strut length inputs,
// seed control, solve / explore actions, readouts, and the dirty flag.

import { ApiClient, ApiError, SolveGate } from './api';
import { clusterEnergies } from './clusters';
import {
  SessionState, buildSolveRequest, createSession, markSolved, setGroupWeight,
  setSeed, setStrutLength,
} from './state';
import type { BatchResult, FixtureInfo } from './types';

export interface PanelHooks {
  onResult(state: SessionState): void;
  onModelLoaded(state: SessionState): void;
}

export class Panel {
  private state: SessionState | null = null;
  private readonly gate = new SolveGate();
  private batch: BatchResult | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly hooks: PanelHooks,
  ) {}

  async start(): Promise<void> {
    const { fixtures } = await this.api.listFixtures();
    this.renderFixturePicker(fixtures);
    await this.loadFixture('simplex');
  }

  private element<K extends keyof HTMLElementTagNameMap>(
    tag: K, parent: HTMLElement, text?: string, className?: string,
  ): HTMLElementTagNameMap[K] {
    const el = document.createElement(tag);
    if (text !== undefined) el.textContent = text;
    if (className) el.className = className;
    parent.appendChild(el);
    return el;
  }

  private renderFixturePicker(fixtures: FixtureInfo[]): void {
    const bar = this.element('div', this.root, undefined, 'fixture-bar');
    this.element('label', bar, 'fixture');
    const select = this.element('select', bar);
    for (const fixture of fixtures) {
      const option = this.element('option', select, fixture.name);
      option.value = fixture.name;
      option.title = fixture.description;
    }
    select.value = 'simplex';
    select.addEventListener('change', () => void this.loadFixture(select.value));
    this.element('div', this.root, undefined, 'panel-body');
  }

  async loadFixture(name: string): Promise<void> {
    const model = await this.api.getFixture(name);
    this.state = createSession(model);
    this.batch = null;
    this.hooks.onModelLoaded(this.state);
    this.renderControls();
  }

  private body(): HTMLElement {
    return this.root.querySelector('.panel-body') as HTMLElement;
  }

  private renderControls(): void {
    if (!this.state) return;
    const body = this.body();
    body.innerHTML = '';
    const state = this.state;

    const dirty = this.element('div', body,
      state.dirty ? 'parameters changed - re-solve' : 'up to date',
      state.dirty ? 'dirty-flag dirty' : 'dirty-flag clean');
    dirty.dataset.role = 'dirty-flag';

    const groupsBox = this.element('fieldset', body);
    this.element('legend', groupsBox, 'weight groups');
    for (const group of state.groups) {
      const row = this.element('div', groupsBox, undefined, 'control-row');
      this.element('label', row, group.label);
      const slider = this.element('input', row);
      slider.type = 'range';
      slider.min = String(group.defaultWeight / 8);
      slider.max = String(group.defaultWeight * 8);
      slider.step = 'any';
      slider.value = String(group.weight);
      const readout = this.element('span', row, group.weight.toPrecision(3));
      slider.addEventListener('input', () => {
        const value = Number(slider.value);
        if (value > 0) {
          this.state = setGroupWeight(this.state!, group.functionalId, value);
          readout.textContent = value.toPrecision(3);
          this.refreshDirty();
        }
      });
    }

    if (state.struts.length > 0) {
      const strutBox = this.element('fieldset', body);
      this.element('legend', strutBox, 'strut lengths');
      for (const strut of state.struts) {
        const row = this.element('div', strutBox, undefined, 'control-row');
        this.element('label', row, `strut ${strut.memberId}`);
        const input = this.element('input', row);
        input.type = 'number';
        input.step = 'any';
        input.value = String(strut.length);
        input.addEventListener('change', () => {
          const value = Number(input.value);
          if (!(value > 0)) {
            // invalid lengths are blocked client-side
            input.value = String(strut.length);
            input.classList.add('invalid');
            setTimeout(() => input.classList.remove('invalid'), 600);
            return;
          }
          this.state = setStrutLength(this.state!, strut.memberId, value);
          this.refreshDirty();
        });
      }
    }

    const seedRow = this.element('div', body, undefined, 'control-row');
    this.element('label', seedRow, 'seed');
    const seedInput = this.element('input', seedRow);
    seedInput.type = 'number';
    seedInput.step = '1';
    seedInput.value = String(state.seed);
    seedInput.addEventListener('change', () => {
      this.state = setSeed(this.state!, Number(seedInput.value));
      this.refreshDirty();
    });

    const actions = this.element('div', body, undefined, 'actions');
    const solveButton = this.element('button', actions, 'Solve');
    solveButton.addEventListener('click', () => void this.solve());
    const exploreButton = this.element('button', actions, 'Explore 20 seeds');
    exploreButton.addEventListener('click', () => void this.explore());

    this.element('div', body, '', 'status').dataset.role = 'status';
    this.element('div', body, '', 'readouts').dataset.role = 'readouts';
    this.element('div', body, '', 'clusters').dataset.role = 'clusters';
    this.refreshReadouts();
    this.refreshClusters();
  }

  private refreshDirty(): void {
    const flag = this.root.querySelector('[data-role=dirty-flag]');
    if (flag && this.state) {
      flag.textContent = this.state.dirty ? 'parameters changed - re-solve' : 'up to date';
      flag.className = this.state.dirty ? 'dirty-flag dirty' : 'dirty-flag clean';
    }
  }

  private setStatus(text: string, isError = false): void {
    const status = this.root.querySelector('[data-role=status]') as HTMLElement | null;
    if (status) {
      status.textContent = text;
      status.classList.toggle('error', isError);
    }
  }

  private refreshReadouts(): void {
    const box = this.root.querySelector('[data-role=readouts]') as HTMLElement | null;
    if (!box || !this.state) return;
    const result = this.state.lastResult;
    if (!result) {
      box.textContent = 'no solve yet';
      return;
    }
    box.innerHTML = '';
    const rows: [string, string][] = [
      ['converged', String(result.converged)],
      ['energy', result.energy.toPrecision(9)],
      ['residual', result.residual_norm.toExponential(2)],
      ['iterations', String(result.iterations)],
      ['seed', String(result.seed)],
    ];
    for (const [key, value] of rows) {
      const row = this.element('div', box, undefined, 'readout-row');
      this.element('span', row, key);
      this.element('strong', row, value);
    }
  }

  private refreshClusters(): void {
    const box = this.root.querySelector('[data-role=clusters]') as HTMLElement | null;
    if (!box) return;
    box.innerHTML = '';
    if (!this.batch) return;
    const seeds = this.batch.results.map((r) => r.seed ?? 0);
    const clusters = clusterEnergies(seeds, this.batch.energies);
    this.element('div', box, `${clusters.length} distinct minima over ${seeds.length} seeds`);
    for (const cluster of clusters) {
      const button = this.element('button', box,
        `E = ${cluster.energy.toPrecision(6)} (${cluster.count} seeds)`, 'cluster');
      button.addEventListener('click', () => {
        const pick = this.batch!.results.find((r) => r.seed === cluster.seeds[0]);
        if (pick && this.state) {
          this.state = markSolved(setSeed(this.state, cluster.seeds[0]), pick);
          this.hooks.onResult(this.state);
          this.refreshDirty();
          this.refreshReadouts();
        }
      });
    }
  }

  async solve(): Promise<void> {
    if (!this.state) return;
    this.setStatus('solving...');
    try {
      const result = await this.gate.run((signal) =>
        this.api.solve(buildSolveRequest(this.state!), signal));
      this.state = markSolved(this.state, result);
      this.hooks.onResult(this.state);
      this.setStatus('');
      this.refreshDirty();
      this.refreshReadouts();
    } catch (error) {
      if (error instanceof DOMException && error.name === 'AbortError') return;
      this.setStatus(this.describe(error), true);
    }
  }

  async explore(seedCount = 20): Promise<void> {
    if (!this.state) return;
    this.setStatus(`exploring ${seedCount} seeds...`);
    try {
      const request = buildSolveRequest(this.state);
      this.batch = await this.gate.run((signal) => this.api.solveBatch({
        model: request.model,
        options: { ...request.options, gradient_tolerance: 1e-6 },
        seeds: Array.from({ length: seedCount }, (_, i) => this.state!.seed + i),
      }, signal));
      this.setStatus('');
      this.refreshClusters();
    } catch (error) {
      if (error instanceof DOMException && error.name === 'AbortError') return;
      this.setStatus(this.describe(error), true);
    }
  }

  private describe(error: unknown): string {
    if (error instanceof ApiError) {
      const payload = error.payload as { problems?: string[] } | null;
      const detail = payload?.problems ? `: ${payload.problems.join('; ')}` : '';
      return `server rejected the request (${error.status}) ${error.message}${detail}`;
    }
    return error instanceof Error ? error.message : String(error);
  }
}
