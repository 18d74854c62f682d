/**
 * Typed client for the linking service HTTP API.
 *
 * Every number rendered by the console comes through here; the UI itself
 * never computes similarity. Errors carry the service's machine-readable
 * code so callers can branch on 404 vs 409 without string matching.
 */

export interface ProvPair {
  pkey: string;
  pvalue: string;
}

export interface AttributeObject {
  key: string;
  value: string;
  prov?: ProvPair[];
}

export interface RelationObject {
  key: string;
  target: string;
  prov?: ProvPair[];
}

export interface Profile {
  id: string;
  attributes: AttributeObject[];
  relations: RelationObject[];
}

export interface SimilarityEdge {
  id1: string;
  id2: string;
  simsc: number;
  rejsc: number;
  cfm: boolean;
  decision: "pending" | "match" | "nonmatch";
}

export interface PendingMatchRow extends SimilarityEdge {
  snippet1: string;
  snippet2: string;
}

export interface SearchHit {
  id: string;
  score: number;
}

export type Verdict = "match" | "nonmatch";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(resp: Response): Promise<ApiError> {
  let code = "error";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body === "object") {
      code = body.code ?? code;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  async pendingMatches(minScore = 0, limit = 100): Promise<PendingMatchRow[]> {
    const params = new URLSearchParams({
      min_score: String(minScore),
      limit: String(limit),
    });
    const body = await this.request<{ matches: PendingMatchRow[] }>(
      `/matches/pending?${params}`,
    );
    return body.matches;
  }

  async confirmMatch(
    id1: string,
    id2: string,
    verdict: Verdict,
  ): Promise<SimilarityEdge> {
    return this.request<SimilarityEdge>(
      `/matches/${encodeURIComponent(id1)}/${encodeURIComponent(id2)}/confirm`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ verdict }),
      },
    );
  }

  async search(q: string, k = 20): Promise<SearchHit[]> {
    const params = new URLSearchParams({ q, k: String(k) });
    const body = await this.request<{ results: SearchHit[] }>(`/search?${params}`);
    return body.results;
  }

  async getProfile(id: string): Promise<Profile> {
    return this.request<Profile>(`/profiles/${encodeURIComponent(id)}`);
  }

  async similar(id: string): Promise<SimilarityEdge[]> {
    const body = await this.request<{ edges: SimilarityEdge[] }>(
      `/profiles/${encodeURIComponent(id)}/similar`,
    );
    return body.edges;
  }
}
