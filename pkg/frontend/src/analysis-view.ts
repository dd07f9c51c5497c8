/**
 * Analysis page: pick methods, point at a results folder, get a plot grid.
 *
 * Each selected method is submitted as its own service job so every grid
 * cell receives a single-method SVG, drawn entirely by the service and
 * injected verbatim. Jobs are polled on one shared 1 s timer until all
 * of them settle. Starting a new run clears the grid first; a failed job
 * leaves an error cell, never a stale plot.
 */

import { ApiClient, ApiError, ServiceUnreachableError } from './api.js';

export const METHOD_LABELS: Record<string, string> = {
  rmsd: 'RMSD',
  rmsf: 'RMSF',
  rog: 'RoG',
  pca: 'PCA',
};

export function methodLabel(method: string): string {
  return METHOD_LABELS[method] ?? method.toUpperCase();
}

export type PanelPhase = 'queued' | 'running' | 'done' | 'failed';

export interface PanelState {
  method: string;
  phase: PanelPhase;
  progress: number;
  jobId: string;
  svg: string;
  error: string;
}

export interface AnalysisFlowOptions {
  pollIntervalMs?: number;
  onTransportError?: (error: ServiceUnreachableError) => void;
}

export class AnalysisFlow {
  private readonly client: ApiClient;
  private readonly pollIntervalMs: number;
  private readonly onTransportError: (error: ServiceUnreachableError) => void;
  private listeners: Array<() => void> = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  // bumped on every start/reset so late poll answers get dropped
  private generation = 0;

  panels: PanelState[] = [];
  title = '';
  flowError = '';

  constructor(client: ApiClient, options: AnalysisFlowOptions = {}) {
    this.client = client;
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.onTransportError = options.onTransportError ?? (() => undefined);
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private reset(): void {
    this.generation += 1;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.panels = [];
    this.flowError = '';
  }

  stop(): void {
    this.reset();
    this.notify();
  }

  async start(folder: string, methods: string[], selection: string, title: string): Promise<void> {
    this.reset();
    this.title = title;
    const generation = this.generation;
    this.panels = methods.map((method) => ({
      method,
      phase: 'queued' as PanelPhase,
      progress: 0,
      jobId: '',
      svg: '',
      error: '',
    }));
    this.notify();

    for (const panel of this.panels) {
      try {
        panel.jobId = await this.client.startAnalysis(folder, [panel.method], selection, title);
      } catch (err) {
        if (generation !== this.generation) return;
        if (err instanceof ServiceUnreachableError) {
          this.panels = [];
          this.flowError = 'Service unreachable.';
          this.notify();
          this.onTransportError(err);
          return;
        }
        if (err instanceof ApiError) {
          // bad folder or bad request: nothing was started, drop the grid
          this.panels = [];
          this.flowError = err.message;
          this.notify();
          return;
        }
        throw err;
      }
    }
    if (generation !== this.generation) return;
    this.notify();
    this.schedulePoll(generation);
  }

  private schedulePoll(generation: number): void {
    this.timer = setTimeout(() => {
      void this.pollOnce(generation);
    }, this.pollIntervalMs);
  }

  private async pollOnce(generation: number): Promise<void> {
    if (generation !== this.generation) return;
    let changed = false;
    for (const panel of this.panels) {
      if (panel.phase === 'done' || panel.phase === 'failed') continue;
      try {
        const job = await this.client.fetchJob(panel.jobId);
        if (generation !== this.generation) return;
        if (job.state === 'failed') {
          panel.phase = 'failed';
          panel.error = job.error || 'analysis failed';
          changed = true;
        } else if (job.state === 'done') {
          const svgName = job.files.find((name) => name.endsWith('.svg'));
          panel.svg = svgName ? await this.client.fetchJobFile(panel.jobId, svgName) : '';
          if (generation !== this.generation) return;
          panel.phase = 'done';
          panel.progress = 1;
          if (!svgName) {
            panel.phase = 'failed';
            panel.error = 'job finished without a plot file';
          }
          changed = true;
        } else if (job.state !== panel.phase || job.progress !== panel.progress) {
          panel.phase = job.state;
          panel.progress = job.progress;
          changed = true;
        }
      } catch (err) {
        if (generation !== this.generation) return;
        if (err instanceof ServiceUnreachableError) {
          this.onTransportError(err);
          break; // keep polling; the service may come back
        }
        panel.phase = 'failed';
        panel.error = err instanceof Error ? err.message : String(err);
        changed = true;
      }
    }
    if (changed) this.notify();
    if (this.panels.some((p) => p.phase === 'queued' || p.phase === 'running')) {
      this.schedulePoll(generation);
    }
  }

  settled(): boolean {
    return (
      this.panels.length > 0 &&
      this.panels.every((p) => p.phase === 'done' || p.phase === 'failed')
    );
  }
}

export interface AnalysisViewOptions extends AnalysisFlowOptions {
  methods?: string[];
}

export class AnalysisView {
  readonly flow: AnalysisFlow;
  private readonly grid: HTMLElement;
  private readonly gridTitle: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly folderInput: HTMLInputElement;
  private readonly selectionInput: HTMLInputElement;
  private readonly titleInput: HTMLInputElement;
  private readonly checkboxes = new Map<string, HTMLInputElement>();

  constructor(root: HTMLElement, client: ApiClient, options: AnalysisViewOptions = {}) {
    this.flow = new AnalysisFlow(client, options);
    const methods = options.methods ?? Object.keys(METHOD_LABELS);

    root.textContent = '';
    const form = document.createElement('div');
    form.className = 'analysis-form';

    this.folderInput = this.addTextInput(form, 'Results folder on the service host', 'folder');
    this.folderInput.placeholder = 'directory containing one structure and one trajectory';
    this.selectionInput = this.addTextInput(form, 'Atom selection', 'selection');
    this.selectionInput.value = 'all';
    this.titleInput = this.addTextInput(form, 'Plot title', 'title');

    const picks = document.createElement('div');
    picks.className = 'method-picks';
    for (const method of methods) {
      const label = document.createElement('label');
      const box = document.createElement('input');
      box.type = 'checkbox';
      box.checked = true;
      box.dataset.method = method;
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${methodLabel(method)}`));
      picks.appendChild(label);
      this.checkboxes.set(method, box);
    }
    form.appendChild(picks);

    const startButton = document.createElement('button');
    startButton.type = 'button';
    startButton.className = 'start-analysis';
    startButton.textContent = 'Run analysis';
    startButton.addEventListener('click', () => void this.startFromForm());
    form.appendChild(startButton);
    root.appendChild(form);

    this.statusLine = document.createElement('div');
    this.statusLine.className = 'status-line';
    root.appendChild(this.statusLine);

    this.gridTitle = document.createElement('h3');
    this.gridTitle.className = 'grid-title';
    root.appendChild(this.gridTitle);

    this.grid = document.createElement('div');
    this.grid.className = 'plot-grid';
    root.appendChild(this.grid);

    this.flow.subscribe(() => this.render());
    this.render();
  }

  private addTextInput(parent: HTMLElement, labelText: string, name: string): HTMLInputElement {
    const label = document.createElement('label');
    label.className = 'analysis-label';
    label.textContent = `${labelText}: `;
    const input = document.createElement('input');
    input.type = 'text';
    input.dataset.name = name;
    label.appendChild(input);
    parent.appendChild(label);
    return input;
  }

  selectedMethods(): string[] {
    const picked: string[] = [];
    for (const [method, box] of this.checkboxes) {
      if (box.checked) picked.push(method);
    }
    return picked;
  }

  async startFromForm(): Promise<void> {
    const methods = this.selectedMethods();
    if (methods.length === 0) {
      this.statusLine.textContent = 'Pick at least one method.';
      return;
    }
    if (!this.folderInput.value.trim()) {
      this.statusLine.textContent = 'Point at a results folder first.';
      return;
    }
    await this.flow.start(
      this.folderInput.value.trim(),
      methods,
      this.selectionInput.value.trim() || 'all',
      this.titleInput.value.trim(),
    );
  }

  private render(): void {
    this.gridTitle.textContent = this.flow.title;
    this.grid.textContent = '';
    if (this.flow.flowError) {
      this.statusLine.textContent = this.flow.flowError;
      return;
    }
    for (const panel of this.flow.panels) {
      const cell = document.createElement('div');
      cell.className = `panel panel-${panel.phase}`;
      cell.dataset.method = panel.method;

      const heading = document.createElement('h4');
      heading.textContent = methodLabel(panel.method);
      cell.appendChild(heading);

      const body = document.createElement('div');
      body.className = 'panel-body';
      if (panel.phase === 'done') {
        body.innerHTML = panel.svg; // service-rendered SVG, unchanged
      } else if (panel.phase === 'failed') {
        body.className = 'panel-body panel-error';
        body.textContent = panel.error;
      } else {
        body.textContent =
          panel.phase === 'running'
            ? `running ${Math.round(panel.progress * 100)}%`
            : 'queued';
      }
      cell.appendChild(body);
      this.grid.appendChild(cell);
    }
    if (this.flow.panels.length > 0) {
      this.statusLine.textContent = this.flow.settled() ? 'Analysis finished.' : 'Working...';
    }
  }
}
