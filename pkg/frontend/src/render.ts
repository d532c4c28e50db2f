/** DOM rendering. Pure view over SessionState: candidates appear exactly in
 * response order, spans are highlighted by token offset, IG is shown both
 * as a number and as a bar relative to the best candidate on screen. */

import type { SessionState } from "./state.js";
import type { Candidate, ResultItem } from "./types.js";

export interface Handlers {
  onChoose(index: number): void;
  onSearchOriginal(): void;
  onRestore(historyIndex: number): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document, tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Reformulated text with the inserted span wrapped in <mark>.
 * The span occupies word positions [position, position + span.length). */
export function renderHighlighted(doc: Document, cand: Candidate): HTMLElement {
  const container = el(doc, "span", "reformulated");
  const words = cand.reformulated.split(" ");
  const start = cand.position;
  const end = cand.position + cand.span.length;
  words.forEach((word, i) => {
    if (i > 0) container.appendChild(doc.createTextNode(" "));
    if (i >= start && i < end) {
      const mark = el(doc, "mark", "span-highlight", word);
      container.appendChild(mark);
    } else {
      container.appendChild(doc.createTextNode(word));
    }
  });
  return container;
}

/** Bar widths are relative to the candidates on screen: best IG fills the
 * bar, the worst shows a sliver, equal IGs all render full. */
export function igBarWidths(candidates: Candidate[]): number[] {
  if (candidates.length === 0) return [];
  const igs = candidates.map((c) => c.ig);
  const best = Math.max(...igs);
  const worst = Math.min(...igs);
  if (best === worst) return igs.map(() => 100);
  return igs.map((ig) => Math.max(4, Math.round(100 * (ig - worst) / (best - worst))));
}

export function renderCandidates(
  root: HTMLElement, state: SessionState, handlers: Handlers,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (state.candidates.length === 0) return;

  const heading = el(doc, "h2", undefined,
    `Reformulations for "${state.currentQuery}"`);
  root.appendChild(heading);
  const list = el(doc, "ol", "candidates");
  const widths = igBarWidths(state.candidates);
  state.candidates.forEach((cand, i) => {
    const item = el(doc, "li",
      "candidate" + (state.selectedIndex === i ? " selected" : ""));
    item.appendChild(renderHighlighted(doc, cand));

    const meta = el(doc, "div", "meta");
    meta.appendChild(el(doc, "span", "ig-value", `IG ${cand.ig.toFixed(4)}`));
    const bar = el(doc, "span", "ig-bar");
    const fill = el(doc, "span", "ig-fill");
    fill.style.width = `${widths[i]}%`;
    bar.appendChild(fill);
    meta.appendChild(bar);

    const button = el(doc, "button", "choose", "search this");
    button.addEventListener("click", () => handlers.onChoose(i));
    meta.appendChild(button);
    item.appendChild(meta);
    list.appendChild(item);
  });
  root.appendChild(list);

  const bypass = el(doc, "button", "search-original", "search original instead");
  bypass.addEventListener("click", () => handlers.onSearchOriginal());
  root.appendChild(bypass);
}

export function renderResults(root: HTMLElement, results: ResultItem[] | null): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (results === null) return;
  root.appendChild(el(doc, "h2", undefined, "Results"));
  if (results.length === 0) {
    root.appendChild(el(doc, "p", "empty", "No documents matched."));
    return;
  }
  const list = el(doc, "ol", "results");
  for (const result of results) {
    const item = el(doc, "li", "result");
    item.appendChild(el(doc, "span", "doc-id", result.doc_id));
    item.appendChild(el(doc, "span", "score", result.score.toFixed(3)));
    item.appendChild(el(doc, "p", "snippet", result.text_snippet));
    list.appendChild(item);
  }
  root.appendChild(list);
}

export function renderHistory(
  root: HTMLElement, state: SessionState, handlers: Handlers,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (state.history.length === 0) return;
  root.appendChild(el(doc, "h2", undefined, "History"));
  const list = el(doc, "ol", "history");
  state.history.forEach((step, i) => {
    const item = el(doc, "li", "history-step");
    item.appendChild(el(doc, "span", "history-query", step.query));
    item.appendChild(el(doc, "span", "history-chosen",
      step.chosen === null ? "(searched original)" : `-> ${step.chosen}`));
    const restore = el(doc, "button", "restore", "restore");
    restore.addEventListener("click", () => handlers.onRestore(i));
    item.appendChild(restore);
    list.appendChild(item);
  });
  root.appendChild(list);
}

export function renderError(root: HTMLElement, error: string | null): void {
  root.textContent = error ?? "";
  root.classList.toggle("visible", error !== null);
}
