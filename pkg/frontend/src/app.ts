// Application shell: session form, classifier picker, tabbed views,
// short-interval polling. All domain data comes from the service on
// every refresh; closing the tab loses nothing but the session form.

import { TriageApi } from "./api.js";
import { loadSession, saveSession, validateSession, UiSession } from "./session.js";
import { AdminScreen } from "./views/admin.js";
import { Dashboard } from "./views/dashboard.js";
import { LabelingScreen } from "./views/labeling.js";
import { ReviewScreen } from "./views/review.js";

const POLL_MS = 3000;
const LEASE_TICK_MS = 1000;

type TabName = "label" | "dashboard" | "review" | "admin";

export class App {
  session: UiSession | null;
  api: TriageApi | null = null;
  tab: TabName = "label";
  schemaId: string | null = null;
  collectionId: string | null = null;
  private pollTimer: number | null = null;
  private leaseTimer: number | null = null;
  private labeling: LabelingScreen | null = null;
  private dashboard: Dashboard | null = null;
  private review: ReviewScreen | null = null;
  private admin: AdminScreen | null = null;

  constructor(private doc: Document, private storage: Storage) {
    this.session = loadSession(storage);
  }

  start(): void {
    this.renderChrome();
    if (this.session) {
      this.connect(this.session);
    }
    this.doc.addEventListener("keydown", (event) => {
      if (
        this.tab === "label" &&
        this.labeling &&
        !(event.target instanceof HTMLInputElement) &&
        !(event.target instanceof HTMLTextAreaElement)
      ) {
        this.labeling.handleKey(event.key);
      }
    });
  }

  connect(session: UiSession): void {
    this.session = session;
    saveSession(this.storage, session);
    this.api = new TriageApi(session.serviceBaseUrl);
    void this.loadSchemas().then(() => this.showTab(this.tab));
    this.startPolling();
  }

  async loadSchemas(): Promise<void> {
    if (!this.api) {
      return;
    }
    const select = this.doc.querySelector<HTMLSelectElement>("#schema-picker");
    if (!select) {
      return;
    }
    select.replaceChildren();
    const collections = await this.api.listCollections();
    for (const collection of collections) {
      for (const schema of await this.api.listClassifiers(collection.id)) {
        const option = this.doc.createElement("option");
        option.value = `${collection.id}:${schema.id}`;
        option.textContent = `${collection.name} / ${schema.id}`;
        select.appendChild(option);
      }
    }
    if (select.options.length > 0) {
      const [collectionId, schemaId] = select.options[0].value.split(":");
      this.collectionId = collectionId;
      this.schemaId = schemaId;
    }
  }

  showTab(tab: TabName): void {
    this.tab = tab;
    const main = this.doc.querySelector<HTMLElement>("#view");
    if (!main || !this.api || !this.session) {
      return;
    }
    main.replaceChildren();
    const status = (text: string) => this.setStatus(text);
    if (tab === "label" && this.schemaId) {
      this.labeling = new LabelingScreen(
        main, this.api, this.session.labelerToken, this.schemaId, status,
      );
      void this.labeling.refresh();
    } else if (tab === "dashboard" && this.schemaId && this.collectionId) {
      this.dashboard = new Dashboard(
        main, this.api, this.collectionId, this.schemaId,
      );
      void this.dashboard.refresh();
    } else if (tab === "review" && this.schemaId) {
      this.review = new ReviewScreen(
        main, this.api, this.schemaId,
        (text) => this.doc.defaultView?.confirm(text) ?? true,
      );
      void this.review.refresh();
    } else if (tab === "admin") {
      this.admin = new AdminScreen(
        main, this.api, status, () => void this.loadSchemas(),
      );
      void this.admin.refresh();
    }
  }

  private startPolling(): void {
    const win = this.doc.defaultView;
    if (!win) {
      return;
    }
    if (this.pollTimer !== null) {
      win.clearInterval(this.pollTimer);
    }
    this.pollTimer = win.setInterval(() => {
      if (this.tab === "label" && this.labeling?.idle) {
        void this.labeling.refresh();
      } else if (this.tab === "dashboard" && this.dashboard) {
        void this.dashboard.refresh();
      }
    }, POLL_MS);
    if (this.leaseTimer !== null) {
      win.clearInterval(this.leaseTimer);
    }
    this.leaseTimer = win.setInterval(() => {
      if (this.tab === "label") {
        this.labeling?.tickLease(new Date());
      }
    }, LEASE_TICK_MS);
  }

  setStatus(text: string): void {
    const bar = this.doc.querySelector<HTMLElement>("#status-bar");
    if (bar) {
      bar.textContent = text;
    }
  }

  private renderChrome(): void {
    const form = this.doc.querySelector<HTMLFormElement>("#session-form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const url = form.querySelector<HTMLInputElement>("input[name=url]");
      const token = form.querySelector<HTMLInputElement>("input[name=token]");
      try {
        this.connect(validateSession(url?.value ?? "", token?.value ?? ""));
        this.setStatus("connected");
      } catch (error) {
        this.setStatus((error as Error).message);
      }
    });
    if (this.session) {
      const url = form?.querySelector<HTMLInputElement>("input[name=url]");
      const token = form?.querySelector<HTMLInputElement>("input[name=token]");
      if (url) {
        url.value = this.session.serviceBaseUrl;
      }
      if (token) {
        token.value = this.session.labelerToken;
      }
    }
    for (const tab of ["label", "dashboard", "review", "admin"] as TabName[]) {
      this.doc
        .querySelector(`#tab-${tab}`)
        ?.addEventListener("click", () => this.showTab(tab));
    }
    this.doc
      .querySelector<HTMLSelectElement>("#schema-picker")
      ?.addEventListener("change", (event) => {
        const value = (event.target as HTMLSelectElement).value;
        const [collectionId, schemaId] = value.split(":");
        this.collectionId = collectionId;
        this.schemaId = schemaId;
        this.showTab(this.tab);
      });
  }
}

export function boot(doc: Document, storage: Storage): App {
  const app = new App(doc, storage);
  app.start();
  return app;
}

declare const window: (Window & typeof globalThis) | undefined;
if (typeof window !== "undefined" && window.document?.getElementById("view")) {
  boot(window.document, window.localStorage);
}
