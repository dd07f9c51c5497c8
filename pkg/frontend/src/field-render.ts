/**
 * Build one labelled form row per field descriptor. Choice fields become
 * dropdowns, booleans become checkboxes, everything numeric gets a number
 * input with its permitted range attached. Each row carries a slot that
 * validation findings are rendered into.
 */

import type { FieldMeta, Finding } from './api.js';

export interface FieldHandle {
  meta: FieldMeta;
  row: HTMLElement;
  input: HTMLInputElement | HTMLSelectElement;
  findingSlot: HTMLElement;
}

function fmt(n: number): string {
  // trim float noise in hints: 1e-09 stays scientific, 250 stays plain
  return Math.abs(n) >= 0.001 || n === 0 ? String(Number(n.toPrecision(10))) : n.toExponential(0);
}

/** Human-readable permitted/typical range, empty when unconstrained. */
export function rangeHint(meta: FieldMeta): string {
  const parts: string[] = [];
  if (meta.minimum !== undefined && meta.maximum !== undefined) {
    parts.push(`allowed ${fmt(meta.minimum)} to ${fmt(meta.maximum)}`);
  } else if (meta.minimum !== undefined) {
    parts.push(meta.minimum > 0 ? `must be above 0` : `at least ${fmt(meta.minimum)}`);
  } else if (meta.maximum !== undefined) {
    parts.push(`at most ${fmt(meta.maximum)}`);
  }
  if (meta.typical) {
    const unit = meta.unit ? ` ${meta.unit}` : '';
    parts.push(`typical ${fmt(meta.typical[0])} to ${fmt(meta.typical[1])}${unit}`);
  }
  return parts.join(', ');
}

function buildInput(meta: FieldMeta, value: string): HTMLInputElement | HTMLSelectElement {
  if (meta.kind === 'choice') {
    const select = document.createElement('select');
    for (const choice of meta.choices ?? []) {
      const option = document.createElement('option');
      option.value = choice;
      option.textContent = choice;
      select.appendChild(option);
    }
    select.value = value;
    return select;
  }
  const input = document.createElement('input');
  if (meta.kind === 'bool') {
    input.type = 'checkbox';
    input.checked = value !== 'no';
    return input;
  }
  if (meta.kind === 'number' || meta.kind === 'integer') {
    input.type = 'number';
    if (meta.kind === 'integer') input.step = '1';
    if (meta.minimum !== undefined) input.min = String(meta.minimum);
    if (meta.maximum !== undefined) input.max = String(meta.maximum);
  } else {
    input.type = 'text';
    if (meta.kind === 'seed') input.placeholder = 'None';
  }
  input.value = value;
  return input;
}

export function renderField(
  meta: FieldMeta,
  value: string,
  onChange: (path: string, value: string) => void,
): FieldHandle {
  const row = document.createElement('div');
  row.className = 'field-row';
  row.dataset.field = meta.name;

  const label = document.createElement('label');
  label.className = 'field-label';
  label.textContent = meta.unit ? `${meta.label} (${meta.unit})` : meta.label;
  row.appendChild(label);

  const input = buildInput(meta, value);
  input.id = `field-${meta.name.replace(/\./g, '-')}`;
  label.htmlFor = input.id;
  row.appendChild(input);

  const hint = document.createElement('div');
  hint.className = 'field-hint';
  const range = rangeHint(meta);
  hint.textContent = range ? `${meta.tooltip} (${range})` : meta.tooltip;
  input.title = hint.textContent;
  row.appendChild(hint);

  const findingSlot = document.createElement('div');
  findingSlot.className = 'field-findings';
  row.appendChild(findingSlot);

  const emit = () => {
    if (input instanceof HTMLInputElement && input.type === 'checkbox') {
      onChange(meta.name, input.checked ? 'yes' : 'no');
    } else {
      onChange(meta.name, input.value);
    }
  };
  input.addEventListener('input', emit);
  input.addEventListener('change', emit);

  return { meta, row, input, findingSlot };
}

/** Replace the row's finding list; errors and warnings style differently. */
export function showFindings(handle: FieldHandle, findings: Finding[]): void {
  handle.findingSlot.textContent = '';
  handle.row.classList.toggle('has-error', findings.some((f) => f.severity === 'error'));
  for (const finding of findings) {
    const item = document.createElement('div');
    item.className = `finding finding-${finding.severity}`;
    item.textContent = finding.suggestion
      ? `${finding.message}. ${finding.suggestion}`
      : finding.message;
    handle.findingSlot.appendChild(item);
  }
}
