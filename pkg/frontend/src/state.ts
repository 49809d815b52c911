// Table controls live in the URL so a reload (or a shared link)
// reproduces the exact same server query.

export type RankKey = "precision" | "recall" | "f1";
export type StatusFilter = "all" | "active" | "approved" | "disapproved" | "unreviewed";

export interface TableControls {
  rankBy: RankKey;
  minPrecision: number | null;
  minRecall: number | null;
  minF1: number | null;
  require: number[];
  exclude: number[];
  status: StatusFilter;
}

export const DEFAULT_CONTROLS: TableControls = {
  rankBy: "f1",
  minPrecision: null,
  minRecall: null,
  minF1: null,
  require: [],
  exclude: [],
  status: "all",
};

const RANK_KEYS: RankKey[] = ["precision", "recall", "f1"];
const STATUS_FILTERS: StatusFilter[] = ["all", "active", "approved", "disapproved", "unreviewed"];

function parseIdList(raw: string | null): number[] {
  if (!raw) return [];
  const out: number[] = [];
  for (const part of raw.split(",")) {
    const n = Number.parseInt(part, 10);
    if (Number.isInteger(n) && n >= 0 && !out.includes(n)) out.push(n);
  }
  return out;
}

function parseThreshold(raw: string | null): number | null {
  if (raw === null || raw === "") return null;
  const v = Number.parseFloat(raw);
  return Number.isFinite(v) ? v : null;
}

/** Controls -> canonical URL query string (only non-default keys). */
export function encodeControls(controls: TableControls): string {
  const params = new URLSearchParams();
  if (controls.rankBy !== "f1") params.set("rank", controls.rankBy);
  if (controls.minPrecision !== null) params.set("minp", String(controls.minPrecision));
  if (controls.minRecall !== null) params.set("minr", String(controls.minRecall));
  if (controls.minF1 !== null) params.set("minf", String(controls.minF1));
  if (controls.require.length) params.set("req", controls.require.join(","));
  if (controls.exclude.length) params.set("exc", controls.exclude.join(","));
  if (controls.status !== "all") params.set("status", controls.status);
  return params.toString();
}

export function decodeControls(query: string): TableControls {
  const params = new URLSearchParams(query);
  const rank = params.get("rank") as RankKey | null;
  const status = params.get("status") as StatusFilter | null;
  return {
    rankBy: rank !== null && RANK_KEYS.includes(rank) ? rank : "f1",
    minPrecision: parseThreshold(params.get("minp")),
    minRecall: parseThreshold(params.get("minr")),
    minF1: parseThreshold(params.get("minf")),
    require: parseIdList(params.get("req")),
    exclude: parseIdList(params.get("exc")),
    status: status !== null && STATUS_FILTERS.includes(status) ? status : "all",
  };
}

/** Controls -> the query parameters GET /rules expects. */
export function controlsToApiQuery(controls: TableControls): string {
  const params = new URLSearchParams();
  params.set("rank_by", controls.rankBy);
  if (controls.minPrecision !== null) params.set("min_precision", String(controls.minPrecision));
  if (controls.minRecall !== null) params.set("min_recall", String(controls.minRecall));
  if (controls.minF1 !== null) params.set("min_f1", String(controls.minF1));
  if (controls.require.length) params.set("require", controls.require.join(","));
  if (controls.exclude.length) params.set("exclude", controls.exclude.join(","));
  if (controls.status !== "all") params.set("status", controls.status);
  return params.toString();
}

export function withExcluded(controls: TableControls, predId: number): TableControls {
  if (controls.exclude.includes(predId)) return controls;
  return { ...controls, exclude: [...controls.exclude, predId] };
}

export function withRequired(controls: TableControls, predId: number): TableControls {
  if (controls.require.includes(predId)) return controls;
  return { ...controls, require: [...controls.require, predId] };
}

export function withoutPredicateFilters(controls: TableControls, predId: number): TableControls {
  return {
    ...controls,
    require: controls.require.filter((p) => p !== predId),
    exclude: controls.exclude.filter((p) => p !== predId),
  };
}
