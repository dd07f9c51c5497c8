/** Shared fixtures: a trimmed field list and duck-typed fetch responses. */

import type { FieldMeta, Finding } from '../src/api.js';

export const FIELDS: FieldMeta[] = [
  {
    name: 'job_name',
    label: 'Job name',
    kind: 'text',
    tooltip: 'Name used for the scheduler job and generated files.',
    unit: '',
    default: 'mdsim',
    advanced: false,
  },
  {
    name: 'water_model',
    label: 'Water model',
    kind: 'choice',
    tooltip: 'Explicit solvent model.',
    unit: '',
    default: 'TIP3P',
    advanced: false,
    choices: ['SPC', 'SPC/E', 'TIP3P', 'TIP4P'],
  },
  {
    name: 'temperature',
    label: 'Temperature',
    kind: 'number',
    tooltip: 'Thermostat target for equilibration and production.',
    unit: 'K',
    default: 300.0,
    advanced: false,
    minimum: 1e-9,
    typical: [250, 400],
  },
  {
    name: 'timestep',
    label: 'Timestep',
    kind: 'number',
    tooltip: 'Integration step.',
    unit: 'fs',
    default: 2.0,
    advanced: false,
    minimum: 1e-9,
    typical: [1, 5],
  },
  {
    name: 'neutralize',
    label: 'Neutralize charge',
    kind: 'bool',
    tooltip: 'Add counter ions until the net charge is zero.',
    unit: '',
    default: true,
    advanced: false,
  },
  {
    name: 'hardware.nodes',
    label: 'Nodes',
    kind: 'integer',
    tooltip: 'Cluster nodes to request.',
    unit: '',
    default: 1,
    advanced: false,
    minimum: 1,
  },
  {
    name: 'hardware.queue',
    label: 'Queue',
    kind: 'text',
    tooltip: 'Scheduler queue name.',
    unit: '',
    default: 'normal',
    advanced: false,
  },
  {
    name: 'random_seed',
    label: 'Random seed',
    kind: 'seed',
    tooltip: 'Fixed seed for reproducible velocity generation.',
    unit: '',
    default: null,
    advanced: true,
  },
  {
    name: 'hardware.email',
    label: 'Notification email',
    kind: 'text',
    tooltip: 'Address the scheduler notifies on completion.',
    unit: '',
    default: '',
    advanced: true,
  },
];

export function finding(
  field: string,
  severity: 'error' | 'warning',
  message: string,
  suggestion = '',
): Finding {
  return { field, severity, message, suggestion };
}

function headersOf(map: Record<string, string>): Headers {
  const lower: Record<string, string> = {};
  for (const [k, v] of Object.entries(map)) lower[k.toLowerCase()] = v;
  return { get: (name: string) => lower[name.toLowerCase()] ?? null } as Headers;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    headers: headersOf({ 'content-type': 'application/json' }),
    json: async () => payload,
    text: async () => JSON.stringify(payload),
    arrayBuffer: async () => new ArrayBuffer(0),
  } as unknown as Response;
}

export function textResponse(body: string, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    headers: headersOf({ 'content-type': 'image/svg+xml' }),
    json: async () => JSON.parse(body),
    text: async () => body,
    arrayBuffer: async () => new TextEncoder().encode(body).buffer,
  } as unknown as Response;
}

export function binaryResponse(bytes: Uint8Array, headers: Record<string, string>): Response {
  return {
    ok: true,
    status: 200,
    headers: headersOf(headers),
    json: async () => {
      throw new Error('not json');
    },
    text: async () => new TextDecoder().decode(bytes),
    arrayBuffer: async () => bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.length),
  } as unknown as Response;
}

export type Route = (body: unknown) => Response | Promise<Response>;

/** Tiny fetch stub: exact-match on `METHOD path`, records every call. */
export function routedFetch(routes: Record<string, Route>) {
  const calls: Array<{ key: string; body: unknown }> = [];
  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const key = `${method} ${input}`;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ key, body });
    const route = routes[key];
    if (!route) throw new TypeError(`no route for ${key}`);
    return route(body);
  };
  return { fetchFn, calls };
}
