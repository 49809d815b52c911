// Playground: what-if edits on a copy of one rule. All metrics and diffs
// come back from the server with each edit; this file only renders them.

import type { ApiClient } from "./api.js";
import type { DiffExample, PlaygroundState, PredicateInfo } from "./types.js";
import { escapeHtml, renderMetrics, renderPredicatePicker } from "./views.js";

function renderDiffExample(diff: DiffExample): string {
  return (
    `<li class="diff diff-${diff.tag} label-${diff.label}">` +
    `<span class="tag">${diff.tag}</span>` +
    `<span class="text">${escapeHtml(diff.text)}</span>` +
    `</li>`
  );
}

export function renderPlayground(state: PlaygroundState, catalog: PredicateInfo[]): string {
  const soleChip = state.predicate_ids.length === 1;
  // The DSL string and predicate_ids share one sort order, so they zip.
  const names = state.expression.split(" AND ");
  const chips = state.predicate_ids
    .map((predId, i) => {
      const drop = soleChip
        ? `<button class="chip-drop" disabled title="a rule needs at least one predicate">×</button>`
        : `<button class="chip-drop" data-drop-id="${predId}">×</button>`;
      const label = escapeHtml(names[i] ?? `#${predId}`);
      return `<span class="chip chip-play" data-pred-id="${predId}">${label}${drop}</span>`;
    })
    .join('<span class="and">AND</span>');

  const diffs = state.diff_vs_base.map(renderDiffExample).join("");
  return (
    `<div class="playground" data-playground-id="${escapeHtml(state.playground_id)}">` +
    `<div class="play-expr">${chips}</div>` +
    `<div class="play-metrics">${renderMetrics(state.metrics)}</div>` +
    `<div class="play-add"><input class="picker-filter" type="search" placeholder="add predicate">` +
    renderPredicatePicker(catalog, state.predicate_ids) +
    `</div>` +
    `<h3>changed vs. original</h3>` +
    `<ul class="diff-list">${diffs || '<li class="empty">no change</li>'}</ul>` +
    `<div class="play-actions">` +
    `<button class="act act-commit">commit as new rule</button>` +
    `<button class="act act-close">discard</button>` +
    `</div>` +
    `</div>`
  );
}

/** Holds the server-issued playground id and funnels edits through it. */
export class PlaygroundController {
  private state: PlaygroundState | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly catalog: PredicateInfo[],
  ) {}

  get current(): PlaygroundState | null {
    return this.state;
  }

  async open(expressionId: number): Promise<PlaygroundState> {
    this.state = await this.api.openPlayground(expressionId);
    return this.state;
  }

  async add(predicateId: number): Promise<PlaygroundState> {
    this.state = await this.api.editPlayground(this.requireId(), "add", predicateId);
    return this.state;
  }

  async drop(predicateId: number): Promise<PlaygroundState> {
    this.state = await this.api.editPlayground(this.requireId(), "drop", predicateId);
    return this.state;
  }

  async commit(): Promise<number> {
    const result = await this.api.commitPlayground(this.requireId());
    this.state = null;
    return result.new_id;
  }

  close(): void {
    this.state = null;
  }

  render(): string {
    if (!this.state) return "";
    return renderPlayground(this.state, this.catalog);
  }

  private requireId(): string {
    if (!this.state) throw new Error("no playground open");
    return this.state.playground_id;
  }
}
