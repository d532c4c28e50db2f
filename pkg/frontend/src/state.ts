/** Session state and its pure transitions.
 *
 * Every user action maps to exactly one transition; network failures go
 * through `requestFailed`, which only sets the error banner and clears the
 * pending flag — everything else in the state is left untouched.
 */

import type { Candidate, ResultItem } from "./types.js";

export interface HistoryStep {
  /** The query the user was working on at this step. */
  query: string;
  /** The reformulation that was searched, or null when the original was used. */
  chosen: string | null;
}

export type Pending = "reformulate" | "search" | null;

export interface SessionState {
  currentQuery: string;
  candidates: Candidate[];
  selectedIndex: number | null;
  results: ResultItem[] | null;
  history: HistoryStep[];
  error: string | null;
  pending: Pending;
}

export function initialState(): SessionState {
  return {
    currentQuery: "",
    candidates: [],
    selectedIndex: null,
    results: null,
    history: [],
    error: null,
    pending: null,
  };
}

export function beginRequest(state: SessionState, pending: Pending): SessionState {
  return { ...state, pending, error: null };
}

/** Candidates arrived for `query`; they replace the previous round. */
export function reformulated(
  state: SessionState,
  query: string,
  candidates: Candidate[],
): SessionState {
  return {
    ...state,
    currentQuery: query,
    candidates,
    selectedIndex: null,
    results: null,
    error: null,
    pending: null,
  };
}

/** Search results for the candidate at `index` (or the original query when null). */
export function searched(
  state: SessionState,
  index: number | null,
  searchedQuery: string,
  results: ResultItem[],
): SessionState {
  return {
    ...state,
    selectedIndex: index,
    results,
    history: [...state.history, {
      query: state.currentQuery,
      chosen: index === null ? null : searchedQuery,
    }],
    error: null,
    pending: null,
  };
}

/** A failed request must leave the session intact apart from the banner. */
export function requestFailed(state: SessionState, message: string): SessionState {
  return { ...state, error: message, pending: null };
}

/** Bring a past query back into the input; history is never truncated. */
export function restored(state: SessionState, historyIndex: number): SessionState {
  const step = state.history[historyIndex];
  if (step === undefined) {
    return state;
  }
  return { ...state, currentQuery: step.query, error: null };
}

export function candidateAt(state: SessionState, index: number): Candidate | undefined {
  return state.candidates[index];
}
