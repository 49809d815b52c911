// Shared test scaffolding: a route-table fetch stub so the client code
// under test talks to canned payloads instead of a live server.

import type { FetchLike } from "../src/api.js";
import type { Metrics, Rule } from "../src/types.js";

type Payload = unknown;

/** Route value: one payload, a queue of payloads consumed per call, or a
 * function of the request body. */
export type RouteValue = Payload | Payload[] | ((body: unknown) => Payload);

export interface StubbedFetch extends FetchLike {
  calls: { url: string; method: string; body: unknown }[];
}

function toResponse(payload: Payload): Response {
  if (payload instanceof Response) return payload;
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "content-type": "application/json" },
  });
}

/** Keys are "METHOD /path" with the query string stripped for matching. */
export function stubFetch(routes: Record<string, RouteValue>): StubbedFetch {
  const queues = new Map<string, Payload[]>();
  const fn = (async (input: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const path = input.split("?")[0];
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    fn.calls.push({ url: input, method, body });
    const key = `${method} ${path}`;
    if (!(key in routes)) {
      return new Response(JSON.stringify({ detail: { code: "no_route", message: key } }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    const value = routes[key];
    if (Array.isArray(value)) {
      if (!queues.has(key)) queues.set(key, [...value]);
      const queue = queues.get(key)!;
      if (queue.length === 0) throw new Error(`stub queue for ${key} exhausted`);
      return toResponse(queue.shift());
    }
    if (typeof value === "function") return toResponse((value as (b: unknown) => Payload)(body));
    return toResponse(value);
  }) as StubbedFetch;
  fn.calls = [];
  return fn;
}

export function errorResponse(status: number, code: string, message: string): Response {
  return new Response(JSON.stringify({ detail: { code, message } }), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function makeMetrics(overrides: Partial<Metrics> = {}): Metrics {
  return { tp: 10, fp: 2, fn: 3, precision: 0.833, recall: 0.769, f1: 0.8, ...overrides };
}

export function makeRule(overrides: Partial<Rule> = {}): Rule {
  return {
    id: 1,
    expression: "prop:tense=past",
    predicate_ids: [1],
    weight: 1.5,
    metrics: makeMetrics(),
    status: "none",
    custom: false,
    ...overrides,
  };
}
