/** DOM wizard: feature controls, propagation locks, preview, download. */

import {
  ConfigObject,
  GenerateResponse,
  GenerationOptions,
  ModelDocument,
  Ternary,
} from "./api.js";
import { attributeDocument } from "./preview.js";
import { WizardStore } from "./state.js";

export interface WizardClient {
  generate(config: ConfigObject, options?: GenerationOptions): Promise<GenerateResponse>;
}

export interface WizardOptions {
  /** File sink for the download button; defaults to a browser blob anchor. */
  saveFile?: (name: string, content: string) => void;
}

const TERNARY_LABELS: readonly [Ternary, string][] = [
  ["undecided", "undecided"],
  ["selected", "selected"],
  ["deselected", "deselected"],
];

function browserSaveFile(name: string, content: string): void {
  const url = URL.createObjectURL(new Blob([content], { type: "text/html" }));
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

function featureDepths(model: ModelDocument): Map<string, number> {
  const parents = new Map(model.features.map((f) => [f.id, f.parent]));
  const depths = new Map<string, number>();
  const depthOf = (fid: string): number => {
    const known = depths.get(fid);
    if (known !== undefined) {
      return known;
    }
    const parent = parents.get(fid);
    const depth = parent === null || parent === undefined ? 0 : depthOf(parent) + 1;
    depths.set(fid, depth);
    return depth;
  };
  for (const f of model.features) {
    depthOf(f.id);
  }
  return depths;
}

export class Wizard {
  private readonly rows = new Map<string, { select: HTMLSelectElement; lock: HTMLElement }>();
  private readonly conflictBanner: HTMLElement;
  private readonly productsLabel: HTMLElement;
  private readonly undecidedLabel: HTMLElement;
  private readonly titleInput: HTMLInputElement;
  private readonly demoToggle: HTMLInputElement;
  private readonly previewButton: HTMLButtonElement;
  private readonly downloadButton: HTMLButtonElement;
  private readonly previewPane: HTMLElement;
  private readonly saveFile: (name: string, content: string) => void;
  private readonly unsubscribe: () => void;
  private lastDocument: string | null = null;
  private lastOperation: Promise<void> = Promise.resolve();

  constructor(
    private readonly container: HTMLElement,
    private readonly store: WizardStore,
    private readonly client: WizardClient,
    options: WizardOptions = {},
  ) {
    this.saveFile = options.saveFile ?? browserSaveFile;
    container.textContent = "";

    const status = el("div", "wizard-status");
    this.conflictBanner = el("div", "wizard-conflict");
    this.conflictBanner.dataset.role = "conflict";
    this.conflictBanner.hidden = true;
    this.productsLabel = el("span", "wizard-products");
    this.productsLabel.dataset.role = "products";
    this.undecidedLabel = el("span", "wizard-undecided");
    this.undecidedLabel.dataset.role = "undecided";
    status.append(this.productsLabel, this.undecidedLabel);
    container.append(this.conflictBanner, status);

    container.append(this.buildTree());

    const actions = el("div", "wizard-actions");
    this.titleInput = document.createElement("input");
    this.titleInput.type = "text";
    this.titleInput.placeholder = "document title";
    this.titleInput.dataset.role = "title-input";
    this.demoToggle = document.createElement("input");
    this.demoToggle.type = "checkbox";
    this.demoToggle.checked = true;
    this.demoToggle.dataset.role = "demo-toggle";
    const demoLabel = el("label", "wizard-demo");
    demoLabel.append(this.demoToggle, document.createTextNode(" demo objects"));
    this.previewButton = document.createElement("button");
    this.previewButton.textContent = "Preview";
    this.previewButton.dataset.role = "preview-button";
    this.previewButton.addEventListener("click", () => {
      this.lastOperation = this.refreshPreview();
    });
    this.downloadButton = document.createElement("button");
    this.downloadButton.textContent = "Download app.html";
    this.downloadButton.dataset.role = "download";
    this.downloadButton.disabled = true;
    this.downloadButton.addEventListener("click", () => {
      if (this.lastDocument !== null) {
        this.saveFile("app.html", this.lastDocument);
      }
    });
    actions.append(this.titleInput, demoLabel, this.previewButton, this.downloadButton);
    container.append(actions);

    this.previewPane = el("div", "wizard-preview");
    this.previewPane.dataset.role = "preview";
    container.append(this.previewPane);

    this.unsubscribe = store.subscribe(() => this.renderState());
    this.renderState();
  }

  /** Resolves once the most recent control interaction has settled. */
  settled(): Promise<void> {
    return this.lastOperation;
  }

  dispose(): void {
    this.unsubscribe();
  }

  private buildTree(): HTMLElement {
    const tree = el("div", "wizard-tree");
    const depths = featureDepths(this.store.model);
    for (const feature of this.store.model.features) {
      const row = el("div", "wizard-feature");
      row.dataset.feature = feature.id;
      row.style.paddingLeft = `${(depths.get(feature.id) ?? 0) * 1.25}rem`;

      const label = el("span", "wizard-name");
      label.textContent = feature.name;
      const detail = el("span", "wizard-detail");
      detail.textContent =
        feature.kind === "variation-point" && feature.group
          ? `${feature.id} (pick ${feature.group.min}..${feature.group.max})`
          : feature.id;

      const select = document.createElement("select");
      for (const [value, text] of TERNARY_LABELS) {
        const option = document.createElement("option");
        option.value = value;
        option.textContent = text;
        select.append(option);
      }
      select.addEventListener("change", () => {
        this.lastOperation = this.store.setDecision(feature.id, select.value as Ternary);
      });

      const lock = el("span", "wizard-lock");
      lock.dataset.role = "lock";
      lock.hidden = true;

      row.append(label, detail, select, lock);
      tree.append(row);
      this.rows.set(feature.id, { select, lock });
    }
    return tree;
  }

  private renderState(): void {
    for (const [fid, row] of this.rows) {
      const locked = this.store.lockedBy(fid);
      row.select.value = this.store.effective(fid);
      row.select.disabled = locked !== null;
      if (locked !== null) {
        row.lock.hidden = false;
        row.lock.textContent = `locked ${locked.state} by ${locked.rule}`;
        row.select.title = locked.rule;
      } else {
        row.lock.hidden = true;
        row.select.title = "";
      }
    }

    const conflict = this.store.conflict;
    this.conflictBanner.hidden = conflict === null;
    if (conflict !== null) {
      this.conflictBanner.textContent = `${conflict.rule}: ${conflict.message}`;
    }

    const products = this.store.products;
    this.productsLabel.textContent =
      products === null ? "products: ?" : `products: ${products}`;
    const undecided = this.store.undecidedCount();
    this.undecidedLabel.textContent =
      undecided === 0 ? "all features decided" : `${undecided} undecided`;

    this.previewButton.disabled =
      !this.store.complete || conflict !== null || this.store.pending;
  }

  /** Generate from the current effective configuration and show the result. */
  async refreshPreview(): Promise<void> {
    const options: GenerationOptions = {
      include_demo_objects: this.demoToggle.checked,
    };
    const title = this.titleInput.value.trim();
    if (title !== "") {
      options.app_title = title;
    }
    const result = await this.client.generate(
      this.store.configObject("effective"),
      options,
    );
    this.lastDocument = result.document;
    this.downloadButton.disabled = false;
    this.renderPreview(result);
  }

  private renderPreview(result: GenerateResponse): void {
    this.previewPane.textContent = "";
    for (const line of attributeDocument(result.document, result.manifest)) {
      const row = el("div", "preview-line");
      const code = el("code", "preview-text");
      code.textContent = line.text;
      row.append(code);
      for (const fid of line.causedBy) {
        const chip = el("span", "preview-cause");
        chip.textContent = fid;
        row.append(chip);
      }
      this.previewPane.append(row);
    }
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

export function mountWizard(
  container: HTMLElement,
  store: WizardStore,
  client: WizardClient,
  options: WizardOptions = {},
): Wizard {
  return new Wizard(container, store, client, options);
}
