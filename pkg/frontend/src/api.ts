/**
 * Typed client for the studio session service.
 *
 * All session state lives server-side; the client never fabricates state
 * locally. The fetch implementation is injectable so tests can run against
 * an in-memory service.
 */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Coefficients {
  alpha: number;
  beta: number;
  gamma: number;
  zeta: number;
  use_rigid: boolean;
  use_pose: boolean;
  use_local: boolean;
  rigid_source: string;
  pose_source: string;
  local_source: string;
}

export const DEFAULT_COEFFICIENTS: Coefficients = {
  alpha: -1,
  beta: 1,
  gamma: 1,
  zeta: 0.5,
  use_rigid: true,
  use_pose: true,
  use_local: true,
  rigid_source: "driving",
  pose_source: "driving",
  local_source: "driving",
};

export interface OverrideEntry {
  layer: number;
  channel: number;
  value: number;
}

export interface SessionState {
  id: string;
  status: string;
  frame_count: number;
  image_size: number;
  coefficients: Coefficients;
  overrides: OverrideEntry[];
}

export interface CatalogEntry {
  layer: number;
  channel: number;
  part: string;
  iou_fg: number;
  iou_bg: number;
}

export interface Catalog {
  version: number;
  thresholds: { t_fg: number; t_bg: number };
  probe_count: number;
  backend_fingerprint: string;
  entries: CatalogEntry[];
}

export interface FrameLatents {
  frame: number;
  style_layers: Record<string, number[]>;
  catalog: { layer: number; channel: number; value: number }[];
}

export interface JobState {
  id: string;
  status: "running" | "done" | "failed";
  progress: number;
  frame_count: number;
  result_path: string | null;
  error: string | null;
}

export interface ServiceError {
  code: string;
  message: string;
  field?: string;
  retry_after_ms?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ServiceError,
  ) {
    super(body.message);
  }

  get isBusy(): boolean {
    return this.status === 409;
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let body: ServiceError;
    try {
      body = (await resp.json()) as ServiceError;
    } catch {
      body = { code: "http", message: `HTTP ${resp.status}` };
    }
    throw new ApiError(resp.status, body);
  }
  return (await resp.json()) as T;
}

export class SessionApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(config: unknown): Promise<{ id: string; frame_count: number }> {
    const resp = await this.fetchImpl(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ config }),
    });
    return expectJson(resp);
  }

  async getState(id: string): Promise<SessionState> {
    return expectJson(await this.fetchImpl(this.url(`/sessions/${id}`)));
  }

  async getChannels(id: string): Promise<Catalog> {
    return expectJson(await this.fetchImpl(this.url(`/sessions/${id}/channels`)));
  }

  async patchParams(id: string, patch: Partial<Coefficients>): Promise<{ coefficients: Coefficients }> {
    const resp = await this.fetchImpl(this.url(`/sessions/${id}/params`), {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
    return expectJson(resp);
  }

  async putOverride(
    id: string,
    layer: number,
    channel: number,
    value: number | null,
  ): Promise<{ overrides: OverrideEntry[] }> {
    const resp = await this.fetchImpl(this.url(`/sessions/${id}/overrides`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ layer, channel, value }),
    });
    return expectJson(resp);
  }

  async renderFrame(id: string, frame: number, size?: number): Promise<Uint8Array> {
    const suffix = size ? `?size=${size}` : "";
    const resp = await this.fetchImpl(this.url(`/sessions/${id}/frames/${frame}/render${suffix}`));
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ServiceError);
    }
    return new Uint8Array(await resp.arrayBuffer());
  }

  async getLatents(id: string, frame: number): Promise<FrameLatents> {
    return expectJson(await this.fetchImpl(this.url(`/sessions/${id}/frames/${frame}/latents`)));
  }

  async startExport(id: string, start: number, stop: number): Promise<{ job: string }> {
    const resp = await this.fetchImpl(this.url(`/sessions/${id}/export`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ start, stop, video: true }),
    });
    return expectJson(resp);
  }

  async getJob(jobId: string): Promise<JobState> {
    return expectJson(await this.fetchImpl(this.url(`/jobs/${jobId}`)));
  }
}
