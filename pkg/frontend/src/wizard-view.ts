/**
 * Four-step setup wizard.
 *
 * Step 1: Basics    - job identity, physics, box and solvation choices
 * Step 2: Hardware  - scheduler resources for the generated job script
 * Step 3: Advanced  - rarely-touched entries, collapsed by default
 * Step 4: Review    - summary, structure upload, validation verdict, download
 *
 * Inputs are created once and never rebuilt, so whatever the user typed
 * survives every validation round-trip; only finding slots and button
 * states refresh.
 */

import { ApiClient, ApiError, ServiceUnreachableError } from './api.js';
import type { Finding } from './api.js';
import { renderField, showFindings } from './field-render.js';
import type { FieldHandle } from './field-render.js';
import { serializeSpec } from './spec-text.js';
import { STEP_ORDER, STEP_TITLES, WizardStore, stepForField } from './wizard-state.js';
import type { StepId } from './wizard-state.js';

export interface WizardViewOptions {
  /** Hands the finished archive to the browser; injectable for tests. */
  download?: (bytes: ArrayBuffer, filename: string) => void;
  onTransportError?: (error: ServiceUnreachableError) => void;
}

function browserDownload(bytes: ArrayBuffer, filename: string): void {
  const url = URL.createObjectURL(new Blob([bytes], { type: 'application/zip' }));
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export class WizardView {
  private readonly store: WizardStore;
  private readonly client: ApiClient;
  private readonly download: (bytes: ArrayBuffer, filename: string) => void;
  private readonly onTransportError: (error: ServiceUnreachableError) => void;

  private readonly handles = new Map<string, FieldHandle>();
  private readonly panels = new Map<StepId, HTMLElement>();
  private readonly navButtons = new Map<StepId, HTMLButtonElement>();
  private readonly generalFindings: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly summaryBody: HTMLElement;
  private readonly structureLabel: HTMLElement;
  private readonly bundleLine: HTMLElement;
  private validateButton!: HTMLButtonElement;
  private generateButton!: HTMLButtonElement;
  private backButton!: HTMLButtonElement;
  private nextButton!: HTMLButtonElement;

  constructor(
    root: HTMLElement,
    store: WizardStore,
    client: ApiClient,
    options: WizardViewOptions = {},
  ) {
    this.store = store;
    this.client = client;
    this.download = options.download ?? browserDownload;
    this.onTransportError = options.onTransportError ?? (() => undefined);

    root.textContent = '';
    root.appendChild(this.buildNav());

    this.generalFindings = document.createElement('div');
    this.generalFindings.className = 'general-findings';
    root.appendChild(this.generalFindings);

    this.summaryBody = document.createElement('tbody');
    this.structureLabel = document.createElement('span');
    this.bundleLine = document.createElement('div');
    this.bundleLine.className = 'bundle-line';

    for (const step of STEP_ORDER) {
      const panel = this.buildPanel(step);
      this.panels.set(step, panel);
      root.appendChild(panel);
    }

    this.statusLine = document.createElement('div');
    this.statusLine.className = 'status-line';
    root.appendChild(this.statusLine);
    root.appendChild(this.buildFooter());

    this.store.subscribe(() => this.sync());
    this.sync();
  }

  private buildNav(): HTMLElement {
    const nav = document.createElement('nav');
    nav.className = 'step-nav';
    STEP_ORDER.forEach((step, i) => {
      const button = document.createElement('button');
      button.type = 'button';
      button.className = 'step-tab';
      button.dataset.step = step;
      button.textContent = `${i + 1}. ${STEP_TITLES[step]}`;
      button.addEventListener('click', () => {
        if (!this.store.goTo(step)) {
          this.setStatus('Validate the form without errors to reach Review.');
        }
      });
      nav.appendChild(button);
      this.navButtons.set(step, button);
    });
    return nav;
  }

  private buildPanel(step: StepId): HTMLElement {
    const panel = document.createElement('section');
    panel.className = 'step-panel';
    panel.dataset.step = step;
    if (step === 'review') {
      this.buildReview(panel);
      return panel;
    }

    const fields = this.store.fields.filter((meta) => stepForField(meta) === step);
    const host = document.createElement('div');
    if (step === 'advanced') {
      // opt-in section: stays folded until the user opens it
      const details = document.createElement('details');
      details.className = 'advanced-box';
      const summary = document.createElement('summary');
      summary.textContent = 'Advanced settings (defaults are fine for most runs)';
      details.appendChild(summary);
      details.appendChild(host);
      panel.appendChild(details);
    } else {
      panel.appendChild(host);
    }

    for (const meta of fields) {
      const handle = renderField(meta, this.store.values[meta.name] ?? '', (path, value) =>
        this.store.setValue(path, value),
      );
      this.handles.set(meta.name, handle);
      host.appendChild(handle.row);
    }
    return panel;
  }

  private buildReview(panel: HTMLElement): void {
    const summary = document.createElement('table');
    summary.className = 'review-summary';
    summary.appendChild(this.summaryBody);
    panel.appendChild(summary);

    const upload = document.createElement('div');
    upload.className = 'structure-upload';
    const label = document.createElement('label');
    label.textContent = 'Structure file (.pdb or .gro): ';
    const picker = document.createElement('input');
    picker.type = 'file';
    picker.accept = '.pdb,.gro';
    picker.addEventListener('change', () => {
      const file = picker.files?.[0];
      if (!file) return;
      void file.text().then((text) => this.store.setStructure(file.name, text));
    });
    label.appendChild(picker);
    upload.appendChild(label);
    upload.appendChild(this.structureLabel);
    panel.appendChild(upload);

    this.generateButton = document.createElement('button');
    this.generateButton.type = 'button';
    this.generateButton.className = 'generate-button';
    this.generateButton.textContent = 'Generate bundle';
    this.generateButton.addEventListener('click', () => void this.generate());
    panel.appendChild(this.generateButton);
    panel.appendChild(this.bundleLine);
  }

  private buildFooter(): HTMLElement {
    const footer = document.createElement('div');
    footer.className = 'wizard-footer';

    this.backButton = document.createElement('button');
    this.backButton.type = 'button';
    this.backButton.textContent = 'Back';
    this.backButton.addEventListener('click', () => this.store.back());

    this.validateButton = document.createElement('button');
    this.validateButton.type = 'button';
    this.validateButton.className = 'validate-button';
    this.validateButton.textContent = 'Validate';
    this.validateButton.addEventListener('click', () => void this.validate());

    this.nextButton = document.createElement('button');
    this.nextButton.type = 'button';
    this.nextButton.textContent = 'Next';
    this.nextButton.addEventListener('click', () => {
      if (!this.store.next()) {
        this.setStatus('Validate the form without errors to reach Review.');
      }
    });

    footer.appendChild(this.backButton);
    footer.appendChild(this.validateButton);
    footer.appendChild(this.nextButton);
    return footer;
  }

  specText(): string {
    return serializeSpec(this.store.fields, this.store.values);
  }

  async validate(): Promise<void> {
    this.setStatus('Validating...');
    try {
      const report = await this.client.validateSpec(this.specText());
      this.store.applyReport(report);
      const errors = this.store.errorCount();
      const warnings = report.findings.length - errors;
      this.setStatus(
        errors === 0
          ? warnings === 0
            ? 'Validation passed.'
            : `Validation passed with ${warnings} warning(s).`
          : `Validation found ${errors} error(s).`,
      );
    } catch (err) {
      if (err instanceof ServiceUnreachableError) {
        this.setStatus('Service unreachable; your entries are untouched.');
        this.onTransportError(err);
        return;
      }
      throw err;
    }
  }

  async generate(): Promise<void> {
    if (!this.store.canGenerate()) return;
    this.setStatus('Generating bundle...');
    try {
      const bundle = await this.client.generateBundle(
        this.specText(),
        this.store.structureName,
        this.store.structureText,
      );
      this.store.setBundle({
        filename: bundle.filename,
        contentHash: bundle.contentHash,
        size: bundle.bytes.byteLength,
      });
      this.download(bundle.bytes, bundle.filename);
      this.setStatus('Bundle ready.');
    } catch (err) {
      if (err instanceof ServiceUnreachableError) {
        this.setStatus('Service unreachable; your entries are untouched.');
        this.onTransportError(err);
        return;
      }
      if (err instanceof ApiError) {
        // the service may reject with fresh findings (e.g. spec edited raw)
        if (err.findings.length > 0) {
          this.store.applyReport({ ok: false, findings: err.findings });
        }
        this.setStatus(`Generation rejected: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  private setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  private renderSummary(): void {
    this.summaryBody.textContent = '';
    for (const meta of this.store.fields) {
      const value = (this.store.values[meta.name] ?? '').trim();
      const row = document.createElement('tr');
      const key = document.createElement('td');
      key.textContent = meta.label;
      const val = document.createElement('td');
      val.textContent = value === '' ? '(service default)' : value;
      row.appendChild(key);
      row.appendChild(val);
      this.summaryBody.appendChild(row);
    }
  }

  private renderGeneralFindings(findings: Finding[]): void {
    this.generalFindings.textContent = '';
    for (const finding of findings) {
      const item = document.createElement('div');
      item.className = `finding finding-${finding.severity}`;
      item.textContent = `${finding.field}: ${finding.message}`;
      this.generalFindings.appendChild(item);
    }
  }

  private sync(): void {
    for (const [step, panel] of this.panels) {
      panel.hidden = step !== this.store.step;
    }
    for (const [step, button] of this.navButtons) {
      button.classList.toggle('active', step === this.store.step);
      button.disabled = step === 'review' && !this.store.canEnterReview();
    }
    for (const [path, handle] of this.handles) {
      showFindings(handle, this.store.validated ? this.store.findingsFor(path) : []);
    }
    this.renderGeneralFindings(this.store.validated ? this.store.unanchoredFindings() : []);

    this.backButton.disabled = this.store.step === 'basics';
    this.nextButton.disabled = this.store.step === 'review';
    this.generateButton.disabled = !this.store.canGenerate();

    this.structureLabel.textContent = this.store.structureName
      ? ` loaded: ${this.store.structureName} (${this.store.structureText.length} chars)`
      : ' none loaded yet';
    this.bundleLine.textContent = this.store.bundle
      ? `Bundle ${this.store.bundle.filename} (${this.store.bundle.size} bytes), ` +
        `content hash ${this.store.bundle.contentHash}`
      : '';

    if (this.store.step === 'review') this.renderSummary();
  }
}
