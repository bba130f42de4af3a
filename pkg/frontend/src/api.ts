// Typed client for the gateway HTTP API. All responses are canonical JSON
// documents; errors carry the server's machine-readable code.

export interface SessionDoc {
  session_id: string;
  page: string;
  consent: boolean;
  created_at: string;
  sentiment_word: string | null;
  ballot: string[] | null;
}

export interface AggregateDoc {
  counts: Record<string, number>;
  total_submissions: number;
  top_k: { word: string; count: number }[];
}

export interface TallyDoc {
  counts: Record<string, number>;
  total_ballots: number;
}

export interface ImpactDoc {
  device_id: string;
  duration_s: number;
  energy_kj: number;
  energy_kwh: number;
  region_code: string;
  carbon_g: number;
}

export interface DeviceDoc {
  id: string;
  display_name: string;
  architecture: string;
  execution_model: string;
  max_qubits: number;
  gate_error: number;
  readout_error: number;
  latency_ms: number;
  power_kw: number;
  available: boolean;
  entropy_class: string;
  coherence_time: string | null;
  connectivity: string | null;
  impact: ImpactDoc;
}

export interface ExecutionDoc {
  execution_id: string;
  device_id: string;
  status: string;
  submitted_at: string;
  completed_at?: string;
  shots: number;
  seed: number;
  counts?: Record<string, number>;
  provenance_digest: string;
}

export interface ArtifactDoc {
  artifact_id: string;
  quantum_id: string;
  public_root: string;
  message: string;
  signature: { leaf_index: number; reveals: string[]; auth_path: string[]; leaf_public: string[] };
  metadata: {
    backend: string;
    device_id: string;
    execution_id: string;
    shots: number;
    seed: number;
    entropy_class: string;
    status: string;
    created_at: string;
  };
}

export interface PrimitiveDoc {
  name: string;
  category: string;
  classical_bits: number;
  quantum_attack: string;
  quantum_bits: number;
  status: string;
  note: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((...args) => fetch(...args));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const doc = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(response.status, doc.code ?? 'error', doc.message ?? response.statusText);
    }
    return doc as T;
  }

  createSession(): Promise<SessionDoc> {
    return this.request('POST', '/api/session');
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request('GET', `/api/session/${sessionId}`);
  }

  advancePage(sessionId: string, target: string): Promise<SessionDoc> {
    return this.request('POST', `/api/session/${sessionId}/page`, { target });
  }

  recordConsent(sessionId: string, granted: boolean): Promise<SessionDoc> {
    return this.request('POST', `/api/session/${sessionId}/consent`, { granted });
  }

  submitSentiment(sessionId: string, word: string): Promise<SessionDoc> {
    return this.request('POST', `/api/session/${sessionId}/sentiment`, { word });
  }

  castVote(sessionId: string, selections: string[]): Promise<SessionDoc> {
    return this.request('POST', `/api/session/${sessionId}/vote`, { selections });
  }

  sentimentAggregate(k = 25): Promise<AggregateDoc> {
    return this.request('GET', `/api/sentiment/aggregate?k=${k}`);
  }

  votesTally(): Promise<TallyDoc> {
    return this.request('GET', '/api/votes/tally');
  }

  listDevices(region?: string): Promise<{ devices: DeviceDoc[]; region: string }> {
    const query = region ? `?region=${encodeURIComponent(region)}` : '';
    return this.request('GET', `/api/devices${query}`);
  }

  execute(sessionId: string, deviceId: string, options: { n_qubits?: number; shots?: number; seed?: number } = {}): Promise<ExecutionDoc> {
    return this.request('POST', `/api/session/${sessionId}/execute`, {
      device_id: deviceId,
      ...options,
    });
  }

  generateArtifact(sessionId: string, executionId: string): Promise<ArtifactDoc> {
    return this.request('POST', `/api/session/${sessionId}/artifact`, { execution_id: executionId });
  }

  verifyArtifact(artifactId: string): Promise<{ artifact_id: string; valid: boolean }> {
    return this.request('GET', `/api/artifact/${artifactId}/verify`);
  }

  vulnerability(): Promise<{ primitives: PrimitiveDoc[] }> {
    return this.request('GET', '/api/vulnerability');
  }

  ledgerVerify(): Promise<{ ok: boolean; length: number; bad_index?: number }> {
    return this.request('GET', '/api/ledger/verify');
  }
}
