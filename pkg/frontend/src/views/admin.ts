// Admin view: create collections and classifiers, pause/resume, and the
// masked push-endpoint link with reveal/copy.

import { Category, Collection, TriageApi } from "../api.js";
import { maskEndpoint } from "../format.js";

export class AdminScreen {
  collections: Collection[] = [];
  revealed = new Set<string>();

  constructor(
    private root: HTMLElement,
    private api: TriageApi,
    private onError: (message: string) => void = () => {},
    private onChanged: () => void = () => {},
  ) {}

  async refresh(): Promise<void> {
    this.collections = await this.api.listCollections();
    this.render();
  }

  async createCollection(name: string, charLimit?: number): Promise<void> {
    try {
      await this.api.createCollection(name, charLimit);
      await this.refresh();
      this.onChanged();
    } catch (error) {
      this.onError((error as Error).message);
    }
  }

  async createClassifier(
    collectionId: string,
    categories: Category[],
  ): Promise<void> {
    try {
      await this.api.createClassifier(collectionId, categories);
      await this.refresh();
      this.onChanged();
    } catch (error) {
      this.onError((error as Error).message);
    }
  }

  async togglePause(collection: Collection): Promise<void> {
    if (collection.status === "running") {
      await this.api.pauseCollection(collection.id);
    } else {
      await this.api.resumeCollection(collection.id);
    }
    await this.refresh();
  }

  endpointText(collection: Collection): string {
    return this.revealed.has(collection.id)
      ? collection.endpointPath
      : maskEndpoint(collection.endpointPath);
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    const list = doc.createElement("div");
    list.className = "collection-list";
    for (const collection of this.collections) {
      const card = doc.createElement("div");
      card.className = "collection-card";
      card.dataset.collectionId = collection.id;

      const title = doc.createElement("h3");
      title.textContent = `${collection.name} (${collection.status})`;
      card.appendChild(title);

      const counters = doc.createElement("p");
      counters.className = "counters";
      counters.textContent =
        `received ${collection.counters.received} · ` +
        `classified ${collection.counters.classified} · ` +
        `labeled ${collection.counters.labeled}`;
      card.appendChild(counters);

      const endpoint = doc.createElement("code");
      endpoint.className = "endpoint-path";
      endpoint.textContent = this.endpointText(collection);
      card.appendChild(endpoint);

      const reveal = doc.createElement("button");
      reveal.className = "reveal-endpoint";
      reveal.textContent = this.revealed.has(collection.id) ? "hide" : "reveal";
      reveal.addEventListener("click", () => {
        if (this.revealed.has(collection.id)) {
          this.revealed.delete(collection.id);
        } else {
          this.revealed.add(collection.id);
        }
        this.render();
      });
      card.appendChild(reveal);

      const copy = doc.createElement("button");
      copy.className = "copy-endpoint";
      copy.textContent = "copy push link";
      copy.addEventListener("click", () => {
        void navigator.clipboard?.writeText(`/push/${collection.endpointPath}`);
      });
      card.appendChild(copy);

      const toggle = doc.createElement("button");
      toggle.className = "toggle-pause";
      toggle.textContent = collection.status === "running" ? "pause" : "resume";
      toggle.addEventListener("click", () => void this.togglePause(collection));
      card.appendChild(toggle);

      list.appendChild(card);
    }
    this.root.appendChild(list);

    this.root.appendChild(this.buildCollectionForm(doc));
    this.root.appendChild(this.buildClassifierForm(doc));
  }

  private buildCollectionForm(doc: Document): HTMLElement {
    const form = doc.createElement("form");
    form.className = "create-collection";
    const name = doc.createElement("input");
    name.placeholder = "collection name";
    name.name = "name";
    const limit = doc.createElement("input");
    limit.placeholder = "char limit (default 140)";
    limit.name = "charLimit";
    const submit = doc.createElement("button");
    submit.textContent = "create collection";
    form.append(name, limit, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const charLimit = limit.value ? Number(limit.value) : undefined;
      void this.createCollection(name.value, charLimit);
    });
    return form;
  }

  private buildClassifierForm(doc: Document): HTMLElement {
    const form = doc.createElement("form");
    form.className = "create-classifier";
    const target = doc.createElement("select");
    target.name = "collection";
    for (const collection of this.collections) {
      const option = doc.createElement("option");
      option.value = collection.id;
      option.textContent = collection.name;
      target.appendChild(option);
    }
    const rows = doc.createElement("textarea");
    rows.name = "categories";
    rows.placeholder = "one category per line: Name: description";
    rows.rows = 8;
    const submit = doc.createElement("button");
    submit.textContent = "create classifier";
    form.append(target, rows, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const categories = parseCategoryLines(rows.value);
      void this.createClassifier(target.value, categories);
    });
    return form;
  }
}

export function parseCategoryLines(text: string): Category[] {
  const categories: Category[] = [];
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) {
      continue;
    }
    const colon = trimmed.indexOf(":");
    if (colon < 0) {
      categories.push({ name: trimmed, description: "" });
    } else {
      categories.push({
        name: trimmed.slice(0, colon).trim(),
        description: trimmed.slice(colon + 1).trim(),
      });
    }
  }
  return categories;
}
