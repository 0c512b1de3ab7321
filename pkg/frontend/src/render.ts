// HTML-string renderers: pure projections of the view state. Event
// handlers attach via data attributes in main.ts (event delegation), so
// these stay testable without a DOM.

import { activeDraft, type ViewState } from './state.js'
import type { DocLabelRow, Hit } from './types.js'

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

export function renderBanner(state: ViewState): string {
  if (!state.banner) return ''
  return `<div class="banner" role="alert">${esc(state.banner)}<button data-action="dismiss-banner">dismiss</button></div>`
}

export function renderNeighborsPanel(state: ViewState): string {
  if (!state.neighbors) {
    return '<section id="neighbors"><p class="hint">Look up neighbors of the active query terms.</p></section>'
  }
  const rows = state.neighbors.neighbors
    .map(
      (n) =>
        `<tr data-token="${esc(n.token)}"><td>${esc(n.token)}</td>` +
        `<td class="sim">${n.similarity.toFixed(3)}</td>` +
        `<td><button data-action="add-term" data-term="${esc(n.token)}">add to query</button></td></tr>`,
    )
    .join('')
  return (
    `<section id="neighbors"><h2>${state.neighbors.k} nearest words` +
    ` (${state.neighbors.terms.map(esc).join(', ')})</h2>` +
    `<table><thead><tr><th>token</th><th>cosine</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table></section>`
  )
}

export function renderQueryPanel(state: ViewState): string {
  const draft = activeDraft(state)
  if (!draft) {
    return '<section id="query"><p class="hint">No query draft yet.</p></section>'
  }
  const chips = draft.terms
    .map(
      (t) =>
        `<span class="chip" data-term="${esc(t)}">${esc(t)}` +
        `<button data-action="remove-term" data-term="${esc(t)}">x</button></span>`,
    )
    .join('')
  const frozen = draft.accepted ? ' (accepted)' : ''
  return (
    `<section id="query"><h2>${esc(draft.label)}${frozen}</h2>` +
    `<div class="chips">${chips}</div>` +
    `<div class="threshold">threshold <strong id="threshold-value">${draft.threshold.toFixed(2)}</strong>` +
    `<button data-action="descend" ${draft.accepted ? 'disabled' : ''}>step down 0.01</button>` +
    `<button data-action="accept" ${draft.accepted ? 'disabled' : ''}>accept threshold</button></div>` +
    `</section>`
  )
}

function hitRow(h: Hit): string {
  return (
    `<tr data-para="${esc(h.para_id)}"><td class="sim">${h.similarity.toFixed(3)}</td>` +
    `<td>${esc(h.doc_id)}</td><td>p.${h.page_number}</td><td>${esc(h.excerpt)}</td></tr>`
  )
}

export function renderHitsPanel(state: ViewState): string {
  const order = state.hitOrder
  const toggle =
    `<button data-action="toggle-order">view ${order === 'desc' ? 'boundary (ascending)' : 'best first (descending)'}</button>`
  const rows = state.hits.map(hitRow).join('')
  return (
    `<section id="hits"><h2>retrieved paragraphs (${order})</h2>${toggle}` +
    `<table><tbody>${rows}</tbody></table></section>`
  )
}

export function renderBoundaryPanel(state: ViewState): string {
  if (!state.boundary) {
    return '<section id="boundary"></section>'
  }
  const rows = state.boundary.hits.map(hitRow).join('')
  return (
    `<section id="boundary"><h2>newly admitted (shuffled, seed ${state.boundary.seed})</h2>` +
    `<table><tbody>${rows}</tbody></table></section>`
  )
}

export function renderMatrix(state: ViewState): string {
  const draftIds = Object.keys(state.matrix)
    .map(Number)
    .sort((a, b) => a - b)
  if (draftIds.length === 0) {
    return '<section id="matrix"><p class="hint">Run a classification preview.</p></section>'
  }
  const docs = new Set<string>()
  for (const id of draftIds) {
    for (const row of state.matrix[id]) docs.add(row.doc_id)
  }
  const byDraft: Record<number, Record<string, DocLabelRow>> = {}
  for (const id of draftIds) {
    byDraft[id] = Object.fromEntries(state.matrix[id].map((r) => [r.doc_id, r]))
  }
  const labelOf = (id: number) => state.drafts.find((d) => d.id === id)?.label ?? `draft ${id}`
  const head = draftIds.map((id) => `<th>${esc(labelOf(id))}</th>`).join('')
  const body = [...docs]
    .sort()
    .map((doc) => {
      const cells = draftIds
        .map((id) => {
          const row = byDraft[id][doc]
          if (!row) return '<td></td>'
          const best = row.best_similarity === null ? 'n/a' : row.best_similarity.toFixed(3)
          const title = `best ${best}${row.best_para_id ? ` (${row.best_para_id})` : ''}`
          return `<td class="${row.predicted ? 'pos' : 'neg'}" title="${esc(title)}">${row.predicted ? '+' : '-'}</td>`
        })
        .join('')
      return `<tr><th>${esc(doc)}</th>${cells}</tr>`
    })
    .join('')
  return (
    `<section id="matrix"><h2>classification preview</h2>` +
    `<table><thead><tr><th>document</th>${head}</tr></thead><tbody>${body}</tbody></table></section>`
  )
}

export function renderApp(state: ViewState): string {
  return (
    renderBanner(state) +
    renderQueryPanel(state) +
    renderNeighborsPanel(state) +
    renderHitsPanel(state) +
    renderBoundaryPanel(state) +
    renderMatrix(state)
  )
}
