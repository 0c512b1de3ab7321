// Pure view-state: every transition consumes a server response, so a page
// reload that replays GET /session (+ per-draft fetches) reconstructs the
// identical view. No mutation is applied optimistically.

import type {
  ApiErrorBody,
  ClassifyResponse,
  DescendResponse,
  Draft,
  DocLabelRow,
  Hit,
  HitsResponse,
  NeighborsResponse,
  SessionResponse,
} from './types.js'

export type BoundaryPanel = {
  seed: number
  hits: Hit[] // newly admitted hits, shuffled with the visible seed
}

export type ViewState = {
  sessionId: string | null
  corpusId: string | null
  drafts: Draft[]
  activeDraftId: number | null
  neighbors: NeighborsResponse | null
  hits: Hit[]
  hitOrder: 'asc' | 'desc'
  boundary: BoundaryPanel | null
  matrix: Record<number, DocLabelRow[]> // draft id -> per-document labels
  banner: string | null
  pending: boolean
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    corpusId: null,
    drafts: [],
    activeDraftId: null,
    neighbors: null,
    hits: [],
    hitOrder: 'desc',
    boundary: null,
    matrix: {},
    banner: null,
    pending: false,
  }
}

export function activeDraft(state: ViewState): Draft | null {
  return state.drafts.find((d) => d.id === state.activeDraftId) ?? null
}

export function withSession(state: ViewState, session: SessionResponse): ViewState {
  const drafts = [...session.drafts].sort((a, b) => a.id - b.id)
  const active =
    state.activeDraftId !== null && drafts.some((d) => d.id === state.activeDraftId)
      ? state.activeDraftId
      : drafts.length > 0
        ? drafts[0].id
        : null
  return {
    ...state,
    sessionId: session.session_id,
    corpusId: session.corpus_id,
    drafts,
    activeDraftId: active,
    banner: null,
  }
}

export function withDraft(state: ViewState, draft: Draft): ViewState {
  const others = state.drafts.filter((d) => d.id !== draft.id)
  return {
    ...state,
    drafts: [...others, draft].sort((a, b) => a.id - b.id),
    activeDraftId: draft.id,
    banner: null,
  }
}

export function withNeighbors(state: ViewState, response: NeighborsResponse): ViewState {
  return { ...state, neighbors: response, banner: null }
}

export function withHits(state: ViewState, response: HitsResponse): ViewState {
  return {
    ...withDraft(state, response.query),
    hits: response.hits,
    hitOrder: response.order,
  }
}

export function withDescend(
  state: ViewState,
  draftId: number,
  response: DescendResponse,
  seed: number,
): ViewState {
  const draft = state.drafts.find((d) => d.id === draftId)
  const updated = draft ? { ...draft, threshold: response.threshold } : null
  const next = updated ? withDraft(state, updated) : state
  return {
    ...next,
    boundary: { seed, hits: seededShuffle(response.admitted, seed) },
  }
}

export function withClassification(state: ViewState, response: ClassifyResponse): ViewState {
  return {
    ...withDraft(state, response.query),
    matrix: { ...state.matrix, [response.query.id]: response.labels },
  }
}

export function withError(state: ViewState, error: ApiErrorBody): ViewState {
  return { ...state, banner: `${error.code}: ${error.message}`, pending: false }
}

export function clearBanner(state: ViewState): ViewState {
  return { ...state, banner: null }
}

// Deterministic PRNG so the boundary panel's "randomized reading" order is
// itself reproducible from the displayed seed.
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

export function seededShuffle<T>(items: readonly T[], seed: number): T[] {
  const rand = mulberry32(seed)
  const out = [...items]
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1))
    ;[out[i], out[j]] = [out[j], out[i]]
  }
  return out
}

/**
 * Rebuild the whole view from session-scoped responses, as a page load
 * does: the result depends only on the server payloads passed in.
 */
export function rebuildFromServer(
  session: SessionResponse,
  activeDraftId: number | null,
  hits: HitsResponse | null,
  classifications: ClassifyResponse[],
  boundarySeed: number,
  lastDescend: DescendResponse | null,
): ViewState {
  let state = withSession(initialState(), session)
  if (activeDraftId !== null) {
    state = { ...state, activeDraftId }
  }
  if (hits) {
    state = withHits(state, hits)
  }
  for (const classification of classifications) {
    state = withClassification(state, classification)
  }
  if (lastDescend && state.activeDraftId !== null) {
    state = withDescend(state, state.activeDraftId, lastDescend, boundarySeed)
  }
  if (activeDraftId !== null) {
    state = { ...state, activeDraftId }
  }
  return state
}
