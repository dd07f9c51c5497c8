/**
 * Turn wizard form values into the plain-text spec document the service
 * and the command line both consume. Field order follows the metadata
 * order from /api/defaults so output is reproducible.
 */

import type { FieldMeta } from './api.js';

/** Seed the form with the service-declared default for one field. */
export function defaultValue(meta: FieldMeta): string {
  if (meta.kind === 'bool') return meta.default === false ? 'no' : 'yes';
  // seed default is null, rendered as an empty input meaning "None"
  if (meta.default === null || meta.default === undefined) return '';
  return String(meta.default);
}

export function initialValues(fields: FieldMeta[]): Record<string, string> {
  const values: Record<string, string> = {};
  for (const meta of fields) values[meta.name] = defaultValue(meta);
  return values;
}

/**
 * Serialize as `key = value` lines. Blank entries are omitted so the
 * service fills in its own defaults; the structure filename is not a
 * form field at all (both the service and the CLI take it from the
 * uploaded file and override whatever the text says).
 */
export function serializeSpec(fields: FieldMeta[], values: Record<string, string>): string {
  const lines: string[] = [];
  for (const meta of fields) {
    const value = (values[meta.name] ?? '').trim();
    if (!value) continue;
    lines.push(`${meta.name} = ${value}`);
  }
  return lines.join('\n') + '\n';
}
