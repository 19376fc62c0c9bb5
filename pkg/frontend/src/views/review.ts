// Review screen: paginated human-labeled examples with per-row delete.
// No labeler identities anywhere, only the vote count.

import { LabeledPage, TriageApi } from "../api.js";

export class ReviewScreen {
  page = 1;
  lastPage: LabeledPage | null = null;

  constructor(
    private root: HTMLElement,
    private api: TriageApi,
    private schemaId: string,
    private confirmDelete: (text: string) => boolean = () => true,
    private pageSize = 50,
  ) {}

  async refresh(): Promise<void> {
    this.lastPage = await this.api.labeledPage(
      this.schemaId,
      this.page,
      this.pageSize,
    );
    this.render();
  }

  async goTo(page: number): Promise<void> {
    this.page = Math.max(1, page);
    await this.refresh();
  }

  async deleteRow(messageId: string): Promise<void> {
    const row = this.lastPage?.items.find((r) => r.messageId === messageId);
    if (!row) {
      return;
    }
    if (!this.confirmDelete(`Delete the label for: "${row.text}"?`)) {
      return;
    }
    await this.api.deleteLabel(messageId, this.schemaId);
    // remove the row in place; no full reload
    this.root
      .querySelector(`tr[data-message-id="${messageId}"]`)
      ?.remove();
    if (this.lastPage) {
      this.lastPage.items = this.lastPage.items.filter(
        (r) => r.messageId !== messageId,
      );
      this.lastPage.total -= 1;
      this.renderPageInfo();
    }
  }

  pageCount(): number {
    if (!this.lastPage) {
      return 1;
    }
    return Math.max(1, Math.ceil(this.lastPage.total / this.pageSize));
  }

  private renderPageInfo(): void {
    const info = this.root.querySelector<HTMLElement>(".page-info");
    if (info && this.lastPage) {
      info.textContent = `page ${this.lastPage.page} of ${this.pageCount()} (${this.lastPage.total} labels)`;
    }
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();
    if (!this.lastPage) {
      return;
    }

    const info = doc.createElement("p");
    info.className = "page-info";
    this.root.appendChild(info);

    const table = doc.createElement("table");
    table.className = "labels-table";
    const head = doc.createElement("tr");
    for (const caption of ["message", "category", "votes", "labeled at", ""]) {
      const th = doc.createElement("th");
      th.textContent = caption;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const row of this.lastPage.items) {
      const tr = doc.createElement("tr");
      tr.dataset.messageId = row.messageId;
      const cells = [row.text, row.category, String(row.labelerCount), row.resolvedAt];
      for (const value of cells) {
        const td = doc.createElement("td");
        td.textContent = value;
        tr.appendChild(td);
      }
      const actions = doc.createElement("td");
      const del = doc.createElement("button");
      del.className = "delete-label";
      del.textContent = "delete";
      del.addEventListener("click", () => void this.deleteRow(row.messageId));
      actions.appendChild(del);
      tr.appendChild(actions);
      table.appendChild(tr);
    }
    this.root.appendChild(table);

    const nav = doc.createElement("div");
    nav.className = "pager";
    const prev = doc.createElement("button");
    prev.textContent = "← newer";
    prev.disabled = this.page <= 1;
    prev.addEventListener("click", () => void this.goTo(this.page - 1));
    const next = doc.createElement("button");
    next.textContent = "older →";
    next.disabled = this.page >= this.pageCount();
    next.addEventListener("click", () => void this.goTo(this.page + 1));
    nav.append(prev, next);
    this.root.appendChild(nav);
    this.renderPageInfo();
  }
}
