// Labeling screen: one task at a time, category buttons with their
// descriptions, number-key voting, lease countdown, auto-advance.

import { LabelTaskView, TriageApi } from "../api.js";
import { hotkeyMap, leaseSecondsLeft } from "../format.js";

export class LabelingScreen {
  current: LabelTaskView | null = null;
  idle = false;
  private keyToCategory = new Map<string, string>();
  private busy = false;

  constructor(
    private root: HTMLElement,
    private api: TriageApi,
    private labeler: string,
    private schemaId: string,
    private onStatus: (text: string) => void = () => {},
  ) {}

  async refresh(): Promise<void> {
    if (!this.labeler) {
      throw new Error("no labeler token in session");
    }
    const task = await this.api.nextTask(this.labeler, this.schemaId);
    this.current = task;
    this.idle = task === null;
    this.render();
  }

  async voteCategory(category: string): Promise<void> {
    if (!this.current || this.busy) {
      return;
    }
    this.busy = true;
    try {
      const outcome = await this.api.vote(
        this.current.taskId,
        this.labeler,
        category,
      );
      this.onStatus(
        outcome.status === "resolved"
          ? `resolved as ${outcome.resolvedCategory}`
          : `vote recorded (${outcome.status})`,
      );
    } finally {
      this.busy = false;
    }
    await this.refresh(); // immediately fetch the next task
  }

  handleKey(key: string): void {
    const category = this.keyToCategory.get(key);
    if (category) {
      void this.voteCategory(category);
    }
  }

  tickLease(now: Date): void {
    const el = this.root.querySelector<HTMLElement>(".lease-countdown");
    if (el && this.current) {
      const left = leaseSecondsLeft(this.current.leaseExpiresAt, now);
      el.textContent = `lease: ${left}s`;
      if (left === 0) {
        // lease gone: the task may be served to someone else; move on
        this.current = null;
        void this.refresh();
      }
    }
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();
    if (!this.current) {
      const idle = doc.createElement("p");
      idle.className = "idle-note";
      idle.textContent =
        "No task available right now; waiting for new messages…";
      this.root.appendChild(idle);
      return;
    }
    const text = doc.createElement("blockquote");
    text.className = "task-text";
    text.textContent = this.current.text;
    this.root.appendChild(text);

    const lease = doc.createElement("span");
    lease.className = "lease-countdown";
    this.root.appendChild(lease);

    const names = this.current.categories.map((c) => c.name);
    this.keyToCategory = hotkeyMap(names);
    const list = doc.createElement("div");
    list.className = "category-buttons";
    this.current.categories.forEach((category, index) => {
      const button = doc.createElement("button");
      button.className = "category-button";
      button.dataset.category = category.name;
      button.title = category.description;
      const shortcut = index < 9 ? `${index + 1}. ` : "";
      button.textContent = `${shortcut}${category.name}`;
      const hint = doc.createElement("small");
      hint.textContent = category.description;
      button.appendChild(doc.createElement("br"));
      button.appendChild(hint);
      button.addEventListener("click", () => void this.voteCategory(category.name));
      list.appendChild(button);
    });
    this.root.appendChild(list);
  }
}
