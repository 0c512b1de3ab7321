// Wire types mirroring the workbench service responses. The UI never
// computes a similarity or a label itself; everything shown comes from
// these payloads.

export type Neighbor = {
  token: string
  similarity: number
}

export type NeighborsResponse = {
  terms: string[]
  k: number
  neighbors: Neighbor[]
}

export type Hit = {
  para_id: string
  doc_id: string
  page_number: number
  similarity: number
  excerpt: string
}

export type HistoryEvent = {
  seq: number
  draft_id: number
  action: 'create' | 'add_term' | 'remove_term' | 'set_threshold' | 'descend' | 'accept'
  value: unknown
  ts: string
}

export type Draft = {
  id: number
  label: string
  terms: string[]
  threshold: number
  notes: string
  accepted: boolean
  history: HistoryEvent[]
}

export type SessionResponse = {
  session_id: string
  corpus_id: string
  embedding_id: string
  drafts: Draft[]
}

export type HitsResponse = {
  query: Draft
  order: 'asc' | 'desc'
  hits: Hit[]
}

export type DescendResponse = {
  threshold: number
  previous: number
  admitted: Hit[]
}

export type DocLabelRow = {
  doc_id: string
  label: string
  predicted: boolean
  best_similarity: number | null
  best_para_id: string | null
}

export type ClassifyResponse = {
  query: Draft
  labels: DocLabelRow[]
}

export type ApiErrorBody = {
  code: string
  message: string
  detail: unknown
}
