/** Controller: wires the form, the API client and the render functions
 * around one SessionState value. Exported as a factory so tests can mount
 * it on a jsdom document with a stubbed fetch. */

import { ApiClient, isAbort } from "./api.js";
import {
  SessionState, beginRequest, candidateAt, initialState, reformulated,
  requestFailed, restored, searched,
} from "./state.js";
import { Handlers, renderCandidates, renderError, renderHistory, renderResults } from "./render.js";

export interface AppElements {
  form: HTMLFormElement;
  input: HTMLInputElement;
  submit: HTMLButtonElement;
  candidates: HTMLElement;
  results: HTMLElement;
  history: HTMLElement;
  error: HTMLElement;
}

export function requiredElements(doc: Document): AppElements {
  const get = (id: string) => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };
  return {
    form: get("query-form") as HTMLFormElement,
    input: get("query-input") as HTMLInputElement,
    submit: get("query-submit") as HTMLButtonElement,
    candidates: get("candidates"),
    results: get("results"),
    history: get("history"),
    error: get("error"),
  };
}

export class App {
  state: SessionState = initialState();

  constructor(private els: AppElements, private api: ApiClient) {
    els.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitQuery(els.input.value);
    });
    els.input.addEventListener("input", () => this.syncSubmitDisabled());
    this.syncSubmitDisabled();
    this.renderAll();
  }

  private handlers: Handlers = {
    onChoose: (index) => void this.chooseCandidate(index),
    onSearchOriginal: () => void this.searchOriginal(),
    onRestore: (index) => this.restore(index),
  };

  private syncSubmitDisabled(): void {
    this.els.submit.disabled = this.els.input.value.trim().length === 0;
  }

  private setState(state: SessionState): void {
    this.state = state;
    this.renderAll();
  }

  private renderAll(): void {
    renderCandidates(this.els.candidates, this.state, this.handlers);
    renderResults(this.els.results, this.state.results);
    renderHistory(this.els.history, this.state, this.handlers);
    renderError(this.els.error, this.state.error);
  }

  async submitQuery(text: string): Promise<void> {
    const query = text.trim();
    if (!query) return;
    this.setState(beginRequest(this.state, "reformulate"));
    try {
      const response = await this.api.reformulate(query);
      this.setState(reformulated(this.state, query, response.candidates));
    } catch (err) {
      if (isAbort(err)) return;
      this.setState(requestFailed(this.state, String((err as Error).message ?? err)));
    }
  }

  async chooseCandidate(index: number): Promise<void> {
    const candidate = candidateAt(this.state, index);
    if (!candidate) return;
    await this.runSearch(index, candidate.reformulated);
  }

  async searchOriginal(): Promise<void> {
    await this.runSearch(null, this.state.currentQuery);
  }

  private async runSearch(index: number | null, query: string): Promise<void> {
    this.setState(beginRequest(this.state, "search"));
    try {
      const response = await this.api.search(query);
      this.setState(searched(this.state, index, query, response.results));
    } catch (err) {
      if (isAbort(err)) return;
      this.setState(requestFailed(this.state, String((err as Error).message ?? err)));
    }
  }

  restore(historyIndex: number): void {
    this.setState(restored(this.state, historyIndex));
    this.els.input.value = this.state.currentQuery;
    this.syncSubmitDisabled();
  }
}

export function createApp(doc: Document, api: ApiClient): App {
  return new App(requiredElements(doc), api);
}
