/** Wire types of the reformulation service (see the package README). */

export interface Candidate {
  reformulated: string;
  position: number;
  span: string[];
  ig: number;
  score: number;
}

export interface ResultItem {
  doc_id: string;
  score: number;
  text_snippet: string;
}

export interface ReformulateResponse {
  candidates: Candidate[];
}

export interface SearchResponse {
  results: ResultItem[];
}

export interface HealthResponse {
  status: string;
  model_loaded: boolean;
  index_docs: number;
}
