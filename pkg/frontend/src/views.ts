// HTML string builders. Every metric printed here is a verbatim server
// field run through toFixed; nothing is recomputed client-side.

import type {
  Delta,
  ExampleSample,
  HighlightedSentence,
  Metrics,
  PredicateInfo,
  Progress,
  Rule,
  RuleList,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Display formatting only; the value itself is a server response field. */
export function fmtMetric(value: number): string {
  return value.toFixed(3);
}

export function renderMetrics(m: Metrics): string {
  return (
    `<span class="m m-p" title="tp ${m.tp} / fp ${m.fp}">P ${fmtMetric(m.precision)}</span>` +
    `<span class="m m-r" title="fn ${m.fn}">R ${fmtMetric(m.recall)}</span>` +
    `<span class="m m-f">F1 ${fmtMetric(m.f1)}</span>`
  );
}

/** One chip per predicate. The DSL string is sorted by predicate id, the
 * same order as predicate_ids, so the two zip. */
export function expressionChips(rule: Pick<Rule, "expression" | "predicate_ids">): string {
  const names = rule.expression.split(" AND ");
  return rule.predicate_ids
    .map((predId, i) => {
      const label = escapeHtml(names[i] ?? `#${predId}`);
      return `<button class="chip" data-pred-id="${predId}">${label}</button>`;
    })
    .join('<span class="and">AND</span>');
}

function weightBadge(rule: Rule): string {
  if (rule.custom) return '<span class="badge badge-custom">custom</span>';
  if (rule.weight === null) return '<span class="badge">—</span>';
  return `<span class="badge badge-weight">w ${rule.weight.toFixed(3)}</span>`;
}

export function renderRuleRow(rule: Rule): string {
  return (
    `<tr class="rule-row status-${rule.status}" data-rule-id="${rule.id}">` +
    `<td class="col-id">${rule.id}</td>` +
    `<td class="col-expr">${expressionChips(rule)}</td>` +
    `<td class="col-weight">${weightBadge(rule)}</td>` +
    `<td class="col-metrics">${renderMetrics(rule.metrics)}</td>` +
    `<td class="col-status"><span class="status">${rule.status}</span></td>` +
    `<td class="col-actions">` +
    `<button class="act act-open" data-act="open" data-rule-id="${rule.id}">inspect</button>` +
    `<button class="act act-play" data-act="play" data-rule-id="${rule.id}">playground</button>` +
    `</td>` +
    `</tr>`
  );
}

export function renderRuleTable(list: RuleList): string {
  const rows = list.rules.map(renderRuleRow).join("");
  return (
    `<table class="rules"><thead><tr>` +
    `<th>id</th><th>expression</th><th>weight</th><th>metrics</th><th>status</th><th></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>` +
    `<p class="total">${list.total} rules</p>`
  );
}

/** Tokens carry the ids of every predicate whose highlight covers them, so
 * hovering a chip can light up exactly its own evidence. */
export function renderSentence(sentence: HighlightedSentence): string {
  const covering: string[][] = sentence.tokens.map(() => []);
  for (const [predId, spans] of Object.entries(sentence.highlights)) {
    for (const [start, end] of spans) {
      for (let i = start; i < end && i < covering.length; i++) covering[i].push(predId);
    }
  }
  const body = sentence.tokens
    .map((token, i) => {
      const preds = covering[i];
      const attr = preds.length ? ` data-preds="${preds.join(" ")}"` : "";
      return `<span class="tok"${attr}>${escapeHtml(token)}</span>`;
    })
    .join(" ");
  return (
    `<li class="sentence label-${sentence.label}" data-sentence-id="${sentence.sentence_id}">` +
    `${body}</li>`
  );
}

export function renderExamplePanel(sample: ExampleSample): string {
  const tp = sample.true_positives.map(renderSentence).join("");
  const fp = sample.false_positives.map(renderSentence).join("");
  return (
    `<div class="examples" data-rule-id="${sample.rule_id}">` +
    `<h3>true positives <span class="count">${sample.true_positives.length}</span></h3>` +
    `<ul class="tp-list">${tp || '<li class="empty">none</li>'}</ul>` +
    `<h3>false positives <span class="count">${sample.false_positives.length}</span></h3>` +
    `<ul class="fp-list">${fp || '<li class="empty">none</li>'}</ul>` +
    `</div>`
  );
}

export function renderDelta(delta: Delta): string {
  return (
    `<div class="delta" data-rule-id="${delta.rule_id}">` +
    `<span class="delta-counts">+${delta.delta_tp} / +${delta.delta_fp}</span>` +
    `<span class="delta-label">new TP / new FP (${delta.new_match_count} sentences)</span>` +
    `<div class="delta-combined">if approved: ${renderMetrics(delta.combined)}</div>` +
    `<div class="delta-base">current: ${renderMetrics(delta.base)}</div>` +
    `</div>`
  );
}

function sparkline(history: number[]): string {
  if (history.length === 0) return '<svg class="spark" viewBox="0 0 100 24"></svg>';
  const step = history.length > 1 ? 100 / (history.length - 1) : 0;
  const points = history
    .map((f1, i) => `${(i * step).toFixed(2)},${(22 - f1 * 20).toFixed(2)}`)
    .join(" ");
  return (
    `<svg class="spark" viewBox="0 0 100 24" preserveAspectRatio="none">` +
    `<polyline points="${points}" fill="none" stroke="currentColor" stroke-width="1.5"/>` +
    `</svg>`
  );
}

export function renderProgress(progress: Progress): string {
  return (
    `<div class="progress">` +
    `<span class="counts">${progress.approved_count} approved · ` +
    `${progress.disapproved_count} disapproved · ${progress.custom_count} custom</span>` +
    `<span class="combined">${renderMetrics(progress.combined)}</span>` +
    sparkline(progress.f1_history) +
    `</div>`
  );
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}

export function renderPredicatePicker(
  catalog: PredicateInfo[],
  presentIds: number[],
  filter = "",
): string {
  const needle = filter.trim().toLowerCase();
  const options = catalog
    .filter((p) => !presentIds.includes(p.id))
    .filter((p) => !needle || p.name.toLowerCase().includes(needle))
    .map(
      (p) =>
        `<button class="picker-option" data-pred-id="${p.id}">` +
        `${escapeHtml(p.name)} <span class="support">${p.support}</span></button>`,
    )
    .join("");
  return `<div class="picker">${options || '<span class="empty">no predicates</span>'}</div>`;
}
