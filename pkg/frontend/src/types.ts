// Payload shapes of the HTTP API. These mirror the server's response
// models field for field; the UI never derives one number from another.

export interface Metrics {
  tp: number;
  fp: number;
  fn: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface PredicateInfo {
  id: number;
  name: string;
  kind: "ActionProperty" | "DictionaryMatch";
  support: number;
}

export type RuleStatus = "approved" | "disapproved" | "none";

export interface Rule {
  id: number;
  expression: string;
  predicate_ids: number[];
  weight: number | null;
  metrics: Metrics;
  status: RuleStatus;
  custom: boolean;
}

export interface RuleList {
  rules: Rule[];
  total: number;
}

export interface HighlightedSentence {
  sentence_id: number;
  text: string;
  tokens: string[];
  label: 0 | 1;
  // predicate id (as string key) -> [start, end) token ranges
  highlights: Record<string, [number, number][]>;
}

export interface ExampleSample {
  rule_id: number;
  seed: number;
  true_positives: HighlightedSentence[];
  false_positives: HighlightedSentence[];
}

export interface Delta {
  rule_id: number;
  base: Metrics;
  combined: Metrics;
  delta_tp: number;
  delta_fp: number;
  new_match_count: number;
  new_match_ids: number[];
}

export interface Progress {
  approved_count: number;
  disapproved_count: number;
  custom_count: number;
  event_count: number;
  combined: Metrics;
  f1_history: number[];
}

export interface DiffExample {
  sentence_id: number;
  text: string;
  label: 0 | 1;
  tag: "gained" | "lost";
}

export interface PlaygroundState {
  playground_id: string;
  base_id: number;
  expression: string;
  predicate_ids: number[];
  metrics: Metrics;
  diff_vs_base: DiffExample[];
  diff_vs_previous: DiffExample[];
}

export interface CommitResult {
  new_id: number;
  rule: Rule;
  progress: Progress;
}

export interface Meta {
  corpus_size: number;
  positives: number;
  negatives: number;
  predicate_count: number;
  rule_count: number;
  custom_count: number;
  model_fingerprint: string;
  corpus_fingerprint: string;
  session_id: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
