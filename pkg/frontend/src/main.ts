// DOM wiring: one render pass per server acknowledgement. Mutations are
// never applied optimistically; the state only changes when the service
// answers, preserving the append-only history contract.

import { api, ApiError } from './api.js'
import { renderApp } from './render.js'
import {
  activeDraft,
  initialState,
  withClassification,
  withDescend,
  withDraft,
  withError,
  withHits,
  withNeighbors,
  withSession,
  type ViewState,
} from './state.js'

let state: ViewState = initialState()
const root = document.getElementById('app') as HTMLElement

function paint(next: ViewState): void {
  state = next
  root.innerHTML = renderApp(state)
}

function fail(error: unknown): void {
  if (error instanceof ApiError) {
    paint(withError(state, error.body))
  } else {
    paint(withError(state, { code: 'network', message: String(error), detail: null }))
  }
}

async function refreshNeighbors(): Promise<void> {
  const draft = activeDraft(state)
  if (!draft) return
  try {
    paint(withNeighbors(state, await api.neighbors(draft.terms)))
  } catch (error) {
    fail(error)
  }
}

async function refreshHits(order: 'asc' | 'desc' = state.hitOrder): Promise<void> {
  const draft = activeDraft(state)
  if (!draft) return
  try {
    paint(withHits(state, await api.hits(draft.id, order)))
  } catch (error) {
    fail(error)
  }
}

async function reloadFromServer(): Promise<void> {
  try {
    paint(withSession(state, await api.session()))
    await refreshHits()
    await refreshNeighbors()
    const draft = activeDraft(state)
    if (draft) {
      paint(withClassification(state, await api.classify(draft.id)))
    }
  } catch (error) {
    fail(error)
  }
}

root.addEventListener('click', (event) => {
  const target = (event.target as HTMLElement).closest('[data-action]')
  if (!target) return
  const action = target.getAttribute('data-action')
  const draft = activeDraft(state)

  if (action === 'dismiss-banner') {
    paint({ ...state, banner: null })
    return
  }
  if (!draft) return

  if (action === 'add-term') {
    const term = target.getAttribute('data-term')!
    api
      .addTerm(draft.id, term)
      .then(async (updated) => {
        paint(withDraft(state, updated))
        // composed vector changed: the neighbor ranking re-sorts
        await refreshNeighbors()
        await refreshHits()
      })
      .catch(fail)
  } else if (action === 'remove-term') {
    const term = target.getAttribute('data-term')!
    api
      .removeTerm(draft.id, term)
      .then(async (updated) => {
        paint(withDraft(state, updated))
        await refreshNeighbors()
        await refreshHits()
      })
      .catch(fail)
  } else if (action === 'descend') {
    api
      .descend(draft.id)
      .then(async (response) => {
        const seed = (Date.now() ^ draft.id) >>> 0
        paint(withDescend(state, draft.id, response, seed))
        await refreshHits()
        paint(withClassification(state, await api.classify(draft.id)))
      })
      .catch(fail)
  } else if (action === 'toggle-order') {
    void refreshHits(state.hitOrder === 'desc' ? 'asc' : 'desc')
  } else if (action === 'accept') {
    api
      .accept(draft.id)
      .then((response) => paint(withDraft(state, response.query)))
      .catch(fail)
  }
})

void reloadFromServer()
