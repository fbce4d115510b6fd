import type {
  AgreementWire,
  AffectRanges,
  ImageRecordWire,
  LemmaMatchWire,
  SearchResponseWire,
  SearchView,
  SenseRef,
  TagStatsWire,
} from "./types";

/** A domain error from the service: HTTP status plus machine-readable code. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly unmatched: string[];

  constructor(status: number, code: string, message: string, unmatched: string[] = []) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.unmatched = unmatched;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const AFFECT_PARAMS: [keyof AffectRanges, string][] = [
  ["valMin", "val_min"],
  ["valMax", "val_max"],
  ["arMin", "ar_min"],
  ["arMax", "ar_max"],
  ["domMin", "dom_min"],
  ["domMax", "dom_max"],
];

/**
 * Thin typed client over the service API. All scoring and ordering happens
 * server-side; this class only moves JSON.
 */
export class WntagsClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    // bind: browsers reject fetch called with a bare reference
    this.fetchImpl = fetchImpl ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      const err = body && typeof body === "object" ? (body as any).error : null;
      throw new ApiError(
        res.status,
        err?.code ?? "UnknownError",
        err?.message ?? `request failed with status ${res.status}`,
        err?.unmatched ?? [],
      );
    }
    return body as T;
  }

  search(view: SearchView): Promise<SearchResponseWire> {
    const params = new URLSearchParams({ q: view.query });
    if (view.dMax !== undefined) params.set("d_max", String(view.dMax));
    if (view.limit !== undefined) params.set("limit", String(view.limit));
    for (const [key, wire] of AFFECT_PARAMS) {
      const value = view.affect[key];
      if (value !== undefined) params.set(wire, String(value));
    }
    return this.request(`/api/search?${params}`);
  }

  async lemmas(q: string, limit = 20): Promise<LemmaMatchWire[]> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    const body = await this.request<{ lemmas: LemmaMatchWire[] }>(`/api/lemmas?${params}`);
    return body.lemmas;
  }

  image(id: string): Promise<ImageRecordWire> {
    return this.request(`/api/images/${encodeURIComponent(id)}`);
  }

  annotate(imageId: string, annotator: string, sense: SenseRef, weight: number):
      Promise<ImageRecordWire> {
    return this.request(`/api/images/${encodeURIComponent(imageId)}/annotations`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Annotator": annotator,
      },
      body: JSON.stringify({ synset: sense.synset, lemma: sense.lemma, weight }),
    });
  }

  agreement(imageId: string): Promise<AgreementWire> {
    return this.request(`/api/images/${encodeURIComponent(imageId)}/agreement`);
  }

  stats(): Promise<TagStatsWire> {
    return this.request("/api/stats/tags");
  }
}
