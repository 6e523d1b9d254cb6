/** Wizard state: user decisions, propagated consequences, persistence. */

import {
  ApiClient,
  ConfigObject,
  Diagnostic,
  ForcedDecision,
  ModelDocument,
  RequestSequence,
  Ternary,
} from "./api.js";

/** The subset of Storage the store needs (window.localStorage satisfies it). */
export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface StoreClient {
  propagate(config: ConfigObject): Promise<{
    configuration: ConfigObject;
    forced: ForcedDecision[];
    conflict?: Diagnostic;
  }>;
  countProducts(config: ConfigObject | null): Promise<number>;
}

const STORAGE_PREFIX = "xrforge-wizard:";
const STATES: readonly Ternary[] = ["selected", "deselected", "undecided"];

/**
 * Holds the user's explicit decisions and the server's latest propagation of
 * them. Decisions persist per model digest, so a stored session never leaks
 * onto a different model. All refreshes share one request sequence: only the
 * newest response is applied (see RequestSequence).
 */
export class WizardStore {
  private readonly featureIds: string[];
  private readonly storageKey: string;
  private readonly decisions = new Map<string, Ternary>();
  private fixpoint = new Map<string, Ternary>();
  private forcedBy = new Map<string, ForcedDecision>();
  private conflictDiag: Diagnostic | null = null;
  private productCount: number | null = null;
  private pendingCount = 0;
  private readonly sequence = new RequestSequence();
  private readonly listeners = new Set<() => void>();

  constructor(
    private readonly client: StoreClient | ApiClient,
    readonly model: ModelDocument,
    readonly modelDigest: string,
    private readonly storage?: StorageLike,
  ) {
    this.featureIds = model.features.map((f) => f.id);
    this.storageKey = STORAGE_PREFIX + modelDigest;
    this.restore();
  }

  /** Feature ids in declaration order. */
  order(): readonly string[] {
    return this.featureIds;
  }

  /** The user's own decision, undecided when they have not touched it. */
  decision(featureId: string): Ternary {
    return this.decisions.get(featureId) ?? "undecided";
  }

  /** Decision plus propagated consequences. */
  effective(featureId: string): Ternary {
    return this.fixpoint.get(featureId) ?? this.decision(featureId);
  }

  /** The forcing record when a feature is pinned by propagation, not the user. */
  lockedBy(featureId: string): ForcedDecision | null {
    if (this.decisions.has(featureId)) {
      return null;
    }
    return this.forcedBy.get(featureId) ?? null;
  }

  get conflict(): Diagnostic | null {
    return this.conflictDiag;
  }

  /** Number of products matching the current decisions, null while unknown. */
  get products(): number | null {
    return this.productCount;
  }

  get pending(): boolean {
    return this.pendingCount > 0;
  }

  get complete(): boolean {
    return this.featureIds.every((fid) => this.effective(fid) !== "undecided");
  }

  undecidedCount(): number {
    return this.featureIds.filter((fid) => this.effective(fid) === "undecided").length;
  }

  /** Configuration document: the user's decisions, or the full fixpoint. */
  configObject(kind: "decisions" | "effective"): ConfigObject {
    const source = kind === "decisions" ? (fid: string) => this.decision(fid) : (fid: string) => this.effective(fid);
    return {
      model: this.modelDigest,
      decisions: this.featureIds
        .map((fid) => ({ feature: fid, state: source(fid) }))
        .filter((d) => d.state !== "undecided"),
    };
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Record a decision (undecided clears it), persist it, and repropagate. */
  async setDecision(featureId: string, state: Ternary): Promise<void> {
    if (!this.featureIds.includes(featureId)) {
      throw new Error(`unknown feature '${featureId}'`);
    }
    if (this.decision(featureId) === state) {
      return;
    }
    if (state === "undecided") {
      this.decisions.delete(featureId);
    } else {
      this.decisions.set(featureId, state);
    }
    this.persist();
    this.notify();
    await this.refresh();
  }

  async clearDecisions(): Promise<void> {
    this.decisions.clear();
    this.persist();
    this.notify();
    await this.refresh();
  }

  /** Re-run propagation and the product count for the current decisions. */
  async refresh(): Promise<void> {
    const token = this.sequence.next();
    const config = this.configObject("decisions");
    this.pendingCount += 1;
    this.notify();
    try {
      const result = await this.client.propagate(config);
      if (!this.sequence.isCurrent(token)) {
        return;
      }
      const count = await this.client.countProducts(config);
      if (!this.sequence.isCurrent(token)) {
        return;
      }
      this.fixpoint = new Map(
        result.configuration.decisions.map((d) => [d.feature, d.state]),
      );
      this.forcedBy = new Map(result.forced.map((f) => [f.feature, f]));
      this.conflictDiag = result.conflict ?? null;
      this.productCount = count;
    } finally {
      this.pendingCount -= 1;
      this.notify();
    }
  }

  private restore(): void {
    const raw = this.storage?.getItem(this.storageKey);
    if (!raw) {
      return;
    }
    let stored: unknown;
    try {
      stored = JSON.parse(raw);
    } catch {
      this.storage?.removeItem(this.storageKey);
      return;
    }
    if (typeof stored !== "object" || stored === null) {
      return;
    }
    for (const [fid, state] of Object.entries(stored as Record<string, unknown>)) {
      if (this.featureIds.includes(fid) && STATES.includes(state as Ternary) && state !== "undecided") {
        this.decisions.set(fid, state as Ternary);
      }
    }
  }

  private persist(): void {
    this.storage?.setItem(
      this.storageKey,
      JSON.stringify(Object.fromEntries(this.decisions)),
    );
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }
}
