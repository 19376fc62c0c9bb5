// Typed client for the triage service HTTP API. Every call is plain
// request/response; the UI keeps no domain state of its own.

export interface Collection {
  id: string;
  name: string;
  endpointPath: string;
  createdAt: string;
  status: "running" | "paused";
  charLimit: number;
  counters: { received: number; classified: number; labeled: number };
}

export interface Category {
  name: string;
  description: string;
}

export interface ClassifierSchema {
  id: string;
  collectionId: string;
  categories: Category[];
  k: number;
  retrainEvery: number;
  activeThreshold: number;
  holdoutFraction: number;
  numTrees: number;
  seed: number;
  createdAt: string;
}

export interface LabelTaskView {
  taskId: string;
  messageId: string;
  schemaId: string;
  text: string;
  priority: number;
  leaseExpiresAt: string;
  categories: Category[];
}

export interface VoteOutcome {
  taskId: string;
  status: "open" | "resolved" | "discarded";
  resolvedCategory: string | null;
}

export interface ClassifierMetrics {
  schemaId: string;
  collectionId: string;
  version: number | null;
  macroAuc: number | null;
  perCategoryAuc: Record<string, number | null>;
  trainSize: number;
  holdoutSize: number;
  labeledTotal: number;
  pendingLabels: number;
  retrainEvery: number;
  classifiedTotal: number;
  openTasks: number;
}

export interface LabeledRow {
  messageId: string;
  text: string;
  category: string;
  labelerCount: number;
  resolvedAt: string;
}

export interface LabeledPage {
  page: number;
  pageSize: number;
  total: number;
  items: LabeledRow[];
}

export interface StatsPayload {
  collectionId: string;
  schemaId: string;
  proportions: Record<string, number>;
  classifiedTotal: number;
}

export class ApiError extends Error {
  constructor(public status: number, public kind: string, message: string) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let kind = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body?.error) {
      kind = body.error.type ?? kind;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, kind, message);
}

export class TriageApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  listCollections(): Promise<Collection[]> {
    return this.request("/collections");
  }

  createCollection(name: string, charLimit?: number): Promise<Collection> {
    return this.request("/collections", {
      method: "POST",
      body: JSON.stringify(charLimit ? { name, charLimit } : { name }),
    });
  }

  pauseCollection(id: string): Promise<Collection> {
    return this.request(`/collections/${id}/pause`, { method: "POST" });
  }

  resumeCollection(id: string): Promise<Collection> {
    return this.request(`/collections/${id}/resume`, { method: "POST" });
  }

  listClassifiers(collectionId: string): Promise<ClassifierSchema[]> {
    return this.request(`/collections/${collectionId}/classifiers`);
  }

  createClassifier(
    collectionId: string,
    categories: Category[],
  ): Promise<ClassifierSchema> {
    return this.request("/classifiers", {
      method: "POST",
      body: JSON.stringify({ collectionId, categories }),
    });
  }

  metrics(schemaId: string): Promise<ClassifierMetrics> {
    return this.request(`/classifiers/${schemaId}/metrics`);
  }

  nextTask(labeler: string, schemaId: string): Promise<LabelTaskView | null> {
    const params = new URLSearchParams({ labeler, schema: schemaId });
    return this.request<{ task: LabelTaskView | null }>(
      `/tasks/next?${params}`,
    ).then((body) => body.task);
  }

  vote(taskId: string, labeler: string, category: string): Promise<VoteOutcome> {
    return this.request(`/tasks/${taskId}/vote`, {
      method: "POST",
      body: JSON.stringify({ labeler, category }),
    });
  }

  labeledPage(schemaId: string, page: number, pageSize = 50): Promise<LabeledPage> {
    const params = new URLSearchParams({
      schema: schemaId,
      page: String(page),
      pageSize: String(pageSize),
    });
    return this.request(`/labels?${params}`);
  }

  deleteLabel(messageId: string, schemaId: string): Promise<void> {
    const params = new URLSearchParams({ schema: schemaId });
    return this.request(`/labels/${messageId}?${params}`, { method: "DELETE" });
  }

  stats(collectionId: string, schemaId: string): Promise<StatsPayload> {
    return this.request(`/stats/${collectionId}/${schemaId}`);
  }
}
