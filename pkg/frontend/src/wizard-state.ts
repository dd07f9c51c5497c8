/**
 * Wizard state: four steps, form values keyed by spec field path, and
 * the findings from the most recent server validation.
 *
 * The one rule everything else leans on: the review step stays locked
 * until the server has validated the CURRENT form values with zero
 * error findings. Editing any field drops the previous verdict.
 */

import type { Finding, ValidationReport } from './api.js';
import { initialValues } from './spec-text.js';
import type { FieldMeta } from './api.js';

export type StepId = 'basics' | 'hardware' | 'advanced' | 'review';

export const STEP_ORDER: StepId[] = ['basics', 'hardware', 'advanced', 'review'];

export const STEP_TITLES: Record<StepId, string> = {
  basics: 'Basics',
  hardware: 'Hardware',
  advanced: 'Advanced',
  review: 'Review',
};

export interface BundleRef {
  filename: string;
  contentHash: string;
  size: number;
}

export function stepForField(meta: FieldMeta): StepId {
  if (meta.advanced) return 'advanced';
  return meta.name.startsWith('hardware.') ? 'hardware' : 'basics';
}

export class WizardStore {
  readonly fields: FieldMeta[];
  values: Record<string, string>;
  step: StepId = 'basics';
  findings: Finding[] = [];
  /** true only while `findings` describe the values as they stand now */
  validated = false;
  structureName = '';
  structureText = '';
  bundle: BundleRef | null = null;

  private listeners: Array<() => void> = [];

  constructor(fields: FieldMeta[]) {
    this.fields = fields;
    this.values = initialValues(fields);
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  setValue(path: string, value: string): void {
    if (this.values[path] === value) return;
    this.values[path] = value;
    this.validated = false;
    this.notify();
  }

  setStructure(name: string, text: string): void {
    this.structureName = name;
    this.structureText = text;
    this.notify();
  }

  /** Record a server verdict. Form values are left untouched. */
  applyReport(report: ValidationReport): void {
    this.findings = report.findings;
    this.validated = true;
    this.notify();
  }

  setBundle(bundle: BundleRef): void {
    this.bundle = bundle;
    this.notify();
  }

  findingsFor(path: string): Finding[] {
    return this.findings.filter((f) => f.field === path);
  }

  /** Findings whose field does not match any rendered input. */
  unanchoredFindings(): Finding[] {
    const known = new Set(this.fields.map((f) => f.name));
    return this.findings.filter((f) => !known.has(f.field));
  }

  errorCount(): number {
    return this.findings.filter((f) => f.severity === 'error').length;
  }

  /** Warnings never block; errors and unvalidated edits do. */
  canEnterReview(): boolean {
    return this.validated && this.errorCount() === 0;
  }

  canGenerate(): boolean {
    return this.canEnterReview() && this.structureName !== '' && this.structureText !== '';
  }

  goTo(step: StepId): boolean {
    if (step === 'review' && !this.canEnterReview()) return false;
    this.step = step;
    this.notify();
    return true;
  }

  next(): boolean {
    const i = STEP_ORDER.indexOf(this.step);
    if (i < 0 || i === STEP_ORDER.length - 1) return false;
    return this.goTo(STEP_ORDER[i + 1]);
  }

  back(): boolean {
    const i = STEP_ORDER.indexOf(this.step);
    if (i <= 0) return false;
    return this.goTo(STEP_ORDER[i - 1]);
  }
}
