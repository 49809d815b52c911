// Browser entry point. Wires DOM events to the API client and drops
// rendered HTML into place. All review state lives server-side; all table
// controls live in the URL.

import { ApiClient, ApiError } from "./api.js";
import {
  DEFAULT_CONTROLS,
  decodeControls,
  encodeControls,
  withExcluded,
  withRequired,
  withoutPredicateFilters,
  type RankKey,
  type StatusFilter,
  type TableControls,
} from "./state.js";
import type { PredicateInfo, Progress } from "./types.js";
import { PlaygroundController } from "./playground.js";
import {
  escapeHtml,
  renderDelta,
  renderErrorBanner,
  renderExamplePanel,
  renderProgress,
  renderRuleTable,
} from "./views.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function isRankKey(v: string): v is RankKey {
  return v === "precision" || v === "recall" || v === "f1";
}

function isStatus(v: string): v is StatusFilter {
  return ["all", "active", "approved", "disapproved", "unreviewed"].includes(v);
}

class App {
  private readonly api = new ApiClient();
  private controls: TableControls = DEFAULT_CONTROLS;
  private catalog: PredicateInfo[] = [];
  private playground: PlaygroundController | null = null;
  private openDetailId: number | null = null;

  async start(): Promise<void> {
    this.controls = decodeControls(window.location.search);
    this.catalog = await this.api.predicates();
    this.playground = new PlaygroundController(this.api, this.catalog);

    const meta = await this.api.meta();
    byId("meta").textContent =
      `${meta.corpus_size} sentences · ${meta.positives} positive · ` +
      `${meta.rule_count} rules · session ${meta.session_id}`;

    this.syncControlWidgets();
    this.bindControls();
    this.bindTableEvents();
    this.bindPlaygroundEvents();
    this.bindHoverHighlight();
    window.addEventListener("popstate", () => {
      this.controls = decodeControls(window.location.search);
      this.syncControlWidgets();
      void this.refreshTable();
    });

    await Promise.all([this.refreshTable(), this.refreshProgress()]);
  }

  // ---- rendering --------------------------------------------------------

  private async refreshTable(): Promise<void> {
    try {
      const list = await this.api.rules(this.controls);
      byId("table").innerHTML = renderRuleTable(list);
      this.renderFilterChips();
      this.clearBanner();
      this.openDetailId = null;
    } catch (err) {
      this.showBanner(err); // last good table stays in place
    }
  }

  private async refreshProgress(): Promise<void> {
    try {
      this.applyProgress(await this.api.progress());
    } catch (err) {
      this.showBanner(err);
    }
  }

  private applyProgress(progress: Progress): void {
    byId("progress").innerHTML = renderProgress(progress);
  }

  private renderFilterChips(): void {
    const nameOf = (id: number) => this.catalog.find((p) => p.id === id)?.name ?? `#${id}`;
    const parts: string[] = [];
    for (const id of this.controls.require) {
      parts.push(
        `<span class="chip chip-require" data-filter-id="${id}">+${escapeHtml(nameOf(id))}</span>`,
      );
    }
    for (const id of this.controls.exclude) {
      parts.push(
        `<span class="chip chip-exclude" data-filter-id="${id}">-${escapeHtml(nameOf(id))}</span>`,
      );
    }
    byId("filter-chips").innerHTML = parts.join("") || '<span class="empty">no predicate filters</span>';
  }

  private showBanner(err: unknown): void {
    const message =
      err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : err instanceof Error
          ? err.message
          : String(err);
    byId("banner").innerHTML = renderErrorBanner(message);
  }

  private clearBanner(): void {
    byId("banner").innerHTML = "";
  }

  // ---- controls ---------------------------------------------------------

  private syncControlWidgets(): void {
    (byId("rank") as HTMLSelectElement).value = this.controls.rankBy;
    (byId("status") as HTMLSelectElement).value = this.controls.status;
    (byId("minp") as HTMLInputElement).value =
      this.controls.minPrecision === null ? "" : String(this.controls.minPrecision);
    (byId("minr") as HTMLInputElement).value =
      this.controls.minRecall === null ? "" : String(this.controls.minRecall);
    (byId("minf") as HTMLInputElement).value =
      this.controls.minF1 === null ? "" : String(this.controls.minF1);
  }

  private readControlWidgets(): void {
    const rank = (byId("rank") as HTMLSelectElement).value;
    const status = (byId("status") as HTMLSelectElement).value;
    const num = (id: string): number | null => {
      const raw = (byId(id) as HTMLInputElement).value.trim();
      if (raw === "") return null;
      const v = Number.parseFloat(raw);
      return Number.isFinite(v) ? v : null;
    };
    this.controls = {
      ...this.controls,
      rankBy: isRankKey(rank) ? rank : "f1",
      status: isStatus(status) ? status : "all",
      minPrecision: num("minp"),
      minRecall: num("minr"),
      minF1: num("minf"),
    };
  }

  private pushControls(): void {
    const query = encodeControls(this.controls);
    const url = query ? `?${query}` : window.location.pathname;
    window.history.pushState(null, "", url);
  }

  private bindControls(): void {
    byId("controls").addEventListener("change", () => {
      this.readControlWidgets();
      this.pushControls();
      void this.refreshTable();
    });
    byId("filter-chips").addEventListener("click", (ev) => {
      const chip = (ev.target as HTMLElement).closest<HTMLElement>("[data-filter-id]");
      if (!chip) return;
      const predId = Number(chip.dataset.filterId);
      this.controls = withoutPredicateFilters(this.controls, predId);
      this.pushControls();
      void this.refreshTable();
    });
  }

  /** Chip clicks cycle a predicate through require -> exclude -> clear. */
  private cyclePredicateFilter(predId: number): void {
    if (this.controls.require.includes(predId)) {
      this.controls = withExcluded(withoutPredicateFilters(this.controls, predId), predId);
    } else if (this.controls.exclude.includes(predId)) {
      this.controls = withoutPredicateFilters(this.controls, predId);
    } else {
      this.controls = withRequired(this.controls, predId);
    }
    this.pushControls();
    void this.refreshTable();
  }

  // ---- rule table -------------------------------------------------------

  private bindTableEvents(): void {
    byId("table").addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const chip = target.closest<HTMLElement>("button.chip");
      if (chip && chip.dataset.predId) {
        this.cyclePredicateFilter(Number(chip.dataset.predId));
        return;
      }
      const action = target.closest<HTMLElement>("[data-act]");
      if (!action) return;
      const ruleId = Number(action.dataset.ruleId);
      if (action.dataset.act === "open") void this.toggleDetail(ruleId);
      if (action.dataset.act === "play") void this.openPlayground(ruleId);
    });
    byId("detail").addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>("[data-verdict]");
      if (!btn) return;
      void this.applyVerdict(Number(btn.dataset.ruleId), btn.dataset.verdict ?? "");
    });
  }

  /** Examples and the delta look-ahead load only when a row is opened. */
  private async toggleDetail(ruleId: number): Promise<void> {
    const detail = byId("detail");
    if (this.openDetailId === ruleId) {
      detail.innerHTML = "";
      this.openDetailId = null;
      return;
    }
    try {
      const rule = await this.api.rule(ruleId);
      const examples = await this.api.examples(ruleId);
      const deltaHtml =
        rule.status === "approved"
          ? '<div class="delta">already approved</div>'
          : renderDelta(await this.api.delta(ruleId));
      detail.innerHTML =
        `<div class="detail-head">rule ${ruleId} · status ${rule.status}</div>` +
        deltaHtml +
        `<div class="verdicts">` +
        `<button data-verdict="approve" data-rule-id="${ruleId}">approve</button>` +
        `<button data-verdict="disapprove" data-rule-id="${ruleId}">disapprove</button>` +
        `<button data-verdict="unmark" data-rule-id="${ruleId}">unmark</button>` +
        `</div>` +
        renderExamplePanel(examples);
      this.openDetailId = ruleId;
      this.clearBanner();
    } catch (err) {
      this.showBanner(err);
    }
  }

  /** No optimistic updates: the progress panel shows exactly what the
   * mutation response returned, and the table is re-fetched. */
  private async applyVerdict(ruleId: number, verdict: string): Promise<void> {
    try {
      let progress: Progress;
      if (verdict === "approve") progress = await this.api.approve(ruleId);
      else if (verdict === "disapprove") progress = await this.api.disapprove(ruleId);
      else progress = await this.api.unmark(ruleId);
      this.applyProgress(progress);
      await this.refreshTable();
      await this.toggleDetail(ruleId);
    } catch (err) {
      this.showBanner(err);
      await this.refreshTable();
    }
  }

  // ---- playground -------------------------------------------------------

  private async openPlayground(ruleId: number): Promise<void> {
    if (!this.playground) return;
    try {
      await this.playground.open(ruleId);
      byId("playground").innerHTML = this.playground.render();
      this.clearBanner();
    } catch (err) {
      this.showBanner(err);
    }
  }

  private bindPlaygroundEvents(): void {
    const pane = byId("playground");
    pane.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const play = this.playground;
      if (!play || !play.current) return;
      const rerender = () => {
        pane.innerHTML = play.render();
      };
      const dropBtn = target.closest<HTMLElement>("[data-drop-id]");
      if (dropBtn) {
        void play
          .drop(Number(dropBtn.dataset.dropId))
          .then(rerender)
          .catch((err) => this.showBanner(err));
        return;
      }
      const option = target.closest<HTMLElement>(".picker-option");
      if (option && option.dataset.predId) {
        void play
          .add(Number(option.dataset.predId))
          .then(rerender)
          .catch((err) => this.showBanner(err));
        return;
      }
      if (target.closest(".act-commit")) {
        void play
          .commit()
          .then(async () => {
            pane.innerHTML = "";
            await this.refreshTable();
            await this.refreshProgress();
          })
          .catch((err) => this.showBanner(err));
        return;
      }
      if (target.closest(".act-close")) {
        play.close();
        pane.innerHTML = "";
      }
    });
    pane.addEventListener("input", (ev) => {
      const input = ev.target as HTMLInputElement;
      if (!input.classList.contains("picker-filter")) return;
      const needle = input.value.trim().toLowerCase();
      pane.querySelectorAll<HTMLElement>(".picker-option").forEach((opt) => {
        const hit = !needle || (opt.textContent ?? "").toLowerCase().includes(needle);
        opt.style.display = hit ? "" : "none";
      });
    });
  }

  // ---- predicate hover highlighting --------------------------------------

  /** Hovering any predicate chip lights up the token spans that satisfy
   * that predicate in every visible example sentence. */
  private bindHoverHighlight(): void {
    const setHighlight = (predId: string | undefined, on: boolean) => {
      if (!predId) return;
      document.querySelectorAll<HTMLElement>(".tok[data-preds]").forEach((tok) => {
        const preds = (tok.dataset.preds ?? "").split(" ");
        if (preds.includes(predId)) tok.classList.toggle("hl", on);
      });
    };
    document.addEventListener("mouseover", (ev) => {
      const chip = (ev.target as HTMLElement).closest<HTMLElement>(".chip");
      if (chip) setHighlight(chip.dataset.predId, true);
    });
    document.addEventListener("mouseout", (ev) => {
      const chip = (ev.target as HTMLElement).closest<HTMLElement>(".chip");
      if (chip) setHighlight(chip.dataset.predId, false);
    });
  }
}

new App().start().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) banner.innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
});
