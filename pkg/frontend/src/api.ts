/**
 * Typed client for the deckforge JSON API.
 *
 * Every byte the wizard offers for download comes straight out of these
 * calls; nothing in the UI composes deck content on its own.
 */

export type Severity = 'error' | 'warning';

export interface Finding {
  field: string;
  severity: Severity;
  message: string;
  suggestion: string;
}

export interface ValidationReport {
  ok: boolean;
  findings: Finding[];
}

export type FieldKind = 'number' | 'integer' | 'choice' | 'text' | 'bool' | 'seed';

/** One form-field descriptor as served by GET /api/defaults. */
export interface FieldMeta {
  name: string;
  label: string;
  kind: FieldKind;
  tooltip: string;
  unit: string;
  default: unknown;
  advanced: boolean;
  choices?: string[];
  minimum?: number;
  maximum?: number;
  typical?: [number, number];
}

export interface DefaultsPayload {
  apiVersion: number;
  fields: FieldMeta[];
  methods: string[];
}

export interface BundleDownload {
  filename: string;
  contentHash: string;
  bytes: ArrayBuffer;
}

export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface JobSnapshot {
  id: string;
  state: JobState;
  progress: number;
  files: string[];
  error: string;
}

/** The service answered with a non-2xx status. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly findings: Finding[];

  constructor(status: number, code: string, message: string, findings: Finding[] = []) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
    this.findings = findings;
  }
}

/** The service could not be reached at all (connection refused, DNS, ...). */
export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super('analysis service is unreachable');
    this.name = 'ServiceUnreachableError';
    this.cause = cause;
  }
}

function asString(v: unknown, fallback = ''): string {
  return typeof v === 'string' ? v : fallback;
}

function asNumber(v: unknown, fallback = 0): number {
  return typeof v === 'number' && Number.isFinite(v) ? v : fallback;
}

function parseFinding(raw: unknown): Finding | null {
  if (typeof raw !== 'object' || raw === null) return null;
  const obj = raw as Record<string, unknown>;
  const severity = obj.severity === 'warning' ? 'warning' : 'error';
  const message = asString(obj.message);
  if (!message) return null;
  return {
    field: asString(obj.field, 'spec'),
    severity,
    message,
    suggestion: asString(obj.suggestion),
  };
}

export function parseFindings(raw: unknown): Finding[] {
  if (!Array.isArray(raw)) return [];
  const out: Finding[] = [];
  for (const item of raw) {
    const f = parseFinding(item);
    if (f) out.push(f);
  }
  return out;
}

function parseFieldMeta(raw: unknown): FieldMeta | null {
  if (typeof raw !== 'object' || raw === null) return null;
  const obj = raw as Record<string, unknown>;
  const name = asString(obj.name);
  const kind = asString(obj.kind) as FieldKind;
  if (!name || !kind) return null;
  const meta: FieldMeta = {
    name,
    label: asString(obj.label, name),
    kind,
    tooltip: asString(obj.tooltip),
    unit: asString(obj.unit),
    default: obj.default ?? null,
    advanced: obj.advanced === true,
  };
  if (Array.isArray(obj.choices)) {
    meta.choices = obj.choices.filter((c): c is string => typeof c === 'string');
  }
  if (typeof obj.minimum === 'number') meta.minimum = obj.minimum;
  if (typeof obj.maximum === 'number') meta.maximum = obj.maximum;
  if (Array.isArray(obj.typical) && obj.typical.length === 2) {
    meta.typical = [asNumber(obj.typical[0]), asNumber(obj.typical[1])];
  }
  return meta;
}

function filenameFromDisposition(header: string | null, fallback: string): string {
  if (!header) return fallback;
  const match = /filename="([^"]+)"/.exec(header);
  return match ? match[1] : fallback;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = '', fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, '');
    // wrap so the global fetch keeps its own `this`
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ServiceUnreachableError(err);
    }
    if (!response.ok) {
      let code = 'http_error';
      let message = `request failed with status ${response.status}`;
      let findings: Finding[] = [];
      try {
        const body = (await response.json()) as Record<string, unknown>;
        code = asString(body.error, code);
        message = asString(body.message, code);
        findings = parseFindings(body.findings);
      } catch {
        // non-JSON error body; keep the status-based message
      }
      throw new ApiError(response.status, code, message, findings);
    }
    return response;
  }

  private async postJson(path: string, payload: unknown): Promise<Response> {
    return this.request(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  async fetchDefaults(): Promise<DefaultsPayload> {
    const response = await this.request('/api/defaults');
    const body = (await response.json()) as Record<string, unknown>;
    const fields: FieldMeta[] = [];
    if (Array.isArray(body.fields)) {
      for (const raw of body.fields) {
        const meta = parseFieldMeta(raw);
        if (meta) fields.push(meta);
      }
    }
    const choices = (body.choices ?? {}) as Record<string, unknown>;
    const methods = Array.isArray(choices.methods)
      ? choices.methods.filter((m): m is string => typeof m === 'string')
      : [];
    return { apiVersion: asNumber(body.api_version, 0), fields, methods };
  }

  async validateSpec(specText: string): Promise<ValidationReport> {
    const response = await this.postJson('/api/validate', { spec: specText });
    const body = (await response.json()) as Record<string, unknown>;
    return { ok: body.ok === true, findings: parseFindings(body.findings) };
  }

  async generateBundle(
    specText: string,
    structureName: string,
    structureText: string,
  ): Promise<BundleDownload> {
    const response = await this.postJson('/api/generate', {
      spec: specText,
      structure_name: structureName,
      structure_text: structureText,
    });
    const bytes = await response.arrayBuffer();
    return {
      filename: filenameFromDisposition(
        response.headers.get('Content-Disposition'),
        'bundle.zip',
      ),
      contentHash: response.headers.get('X-Content-Hash') ?? '',
      bytes,
    };
  }

  async startAnalysis(
    folder: string,
    methods: string[],
    selection: string,
    title: string,
  ): Promise<string> {
    const response = await this.postJson('/api/analyze', {
      folder,
      methods,
      selection,
      title,
    });
    const body = (await response.json()) as Record<string, unknown>;
    const id = asString(body.id);
    if (!id) throw new ApiError(200, 'bad_payload', 'job id missing from response');
    return id;
  }

  async fetchJob(id: string): Promise<JobSnapshot> {
    const response = await this.request(`/api/jobs/${encodeURIComponent(id)}`);
    const body = (await response.json()) as Record<string, unknown>;
    const state = asString(body.state) as JobState;
    return {
      id: asString(body.id, id),
      state: ['queued', 'running', 'done', 'failed'].includes(state) ? state : 'queued',
      progress: asNumber(body.progress),
      files: Array.isArray(body.files)
        ? body.files.filter((f): f is string => typeof f === 'string')
        : [],
      error: asString(body.error),
    };
  }

  async fetchJobFile(id: string, name: string): Promise<string> {
    const response = await this.request(
      `/api/jobs/${encodeURIComponent(id)}/files/${encodeURIComponent(name)}`,
    );
    return response.text();
  }
}
