// Thin typed client over the workbench service. Non-2xx responses reject
// with the service's {code, message, detail} body so callers surface it
// in the banner instead of crashing.

import type {
  ApiErrorBody,
  ClassifyResponse,
  DescendResponse,
  Draft,
  HitsResponse,
  NeighborsResponse,
  SessionResponse,
} from './types.js'

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.message)
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  })
  const body = await response.json()
  if (!response.ok) {
    throw new ApiError(response.status, body as ApiErrorBody)
  }
  return body as T
}

export const api = {
  session: () => request<SessionResponse>('/session'),
  neighbors: (terms: string[], k = 50) =>
    request<NeighborsResponse>(`/neighbors?terms=${encodeURIComponent(terms.join(','))}&k=${k}`),
  createQuery: (label: string, terms: string[], threshold = 0.55) =>
    request<Draft>('/queries', {
      method: 'POST',
      body: JSON.stringify({ label, terms, threshold }),
    }),
  addTerm: (draftId: number, term: string) =>
    request<Draft>(`/queries/${draftId}`, {
      method: 'PATCH',
      body: JSON.stringify({ action: 'add_term', value: term }),
    }),
  removeTerm: (draftId: number, term: string) =>
    request<Draft>(`/queries/${draftId}`, {
      method: 'PATCH',
      body: JSON.stringify({ action: 'remove_term', value: term }),
    }),
  setThreshold: (draftId: number, threshold: number) =>
    request<Draft>(`/queries/${draftId}`, {
      method: 'PATCH',
      body: JSON.stringify({ action: 'set_threshold', value: threshold }),
    }),
  hits: (draftId: number, order: 'asc' | 'desc') =>
    request<HitsResponse>(`/queries/${draftId}/hits?order=${order}`),
  descend: (draftId: number) =>
    request<DescendResponse>(`/queries/${draftId}/descend`, { method: 'POST' }),
  classify: (draftId: number) => request<ClassifyResponse>(`/classify/${draftId}`, { method: 'POST' }),
  accept: (draftId: number) =>
    request<{ query: Draft; report_paths: string[] }>(`/queries/${draftId}/accept`, {
      method: 'POST',
    }),
}
