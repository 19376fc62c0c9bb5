// Classifier dashboard: AUC numbers exactly as the metrics endpoint
// returned them, retrain progress, and the descending proportions chart.

import { ClassifierMetrics, StatsPayload, TriageApi } from "../api.js";
import { proportionsChart } from "../charts.js";
import { metricText, retrainProgress } from "../format.js";

export class Dashboard {
  lastMetrics: ClassifierMetrics | null = null;

  constructor(
    private root: HTMLElement,
    private api: TriageApi,
    private collectionId: string,
    private schemaId: string,
  ) {}

  async refresh(): Promise<void> {
    const [metrics, stats] = await Promise.all([
      this.api.metrics(this.schemaId),
      this.api.stats(this.collectionId, this.schemaId),
    ]);
    this.lastMetrics = metrics;
    this.render(metrics, stats);
  }

  render(metrics: ClassifierMetrics, stats: StatsPayload): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    if (metrics.version === null) {
      const waiting = doc.createElement("p");
      waiting.className = "awaiting-note";
      waiting.textContent = `Awaiting the first ${metrics.retrainEvery} labels — ${retrainProgress(metrics.pendingLabels, metrics.retrainEvery)} so far.`;
      this.root.appendChild(waiting);
    } else {
      const table = doc.createElement("table");
      table.className = "metrics-table";
      const rows: Array<[string, string, string]> = [
        ["model version", String(metrics.version), "model-version"],
        ["macro AUC", metricText(metrics.macroAuc), "macro-auc"],
        ["training set", String(metrics.trainSize), "train-size"],
        ["hold-out set", String(metrics.holdoutSize), "holdout-size"],
        ["labeled messages", String(metrics.labeledTotal), "labeled-total"],
        ["classified messages", String(metrics.classifiedTotal), "classified-total"],
        [
          "labels until next retrain",
          retrainProgress(metrics.pendingLabels, metrics.retrainEvery),
          "retrain-progress",
        ],
      ];
      for (const [label, value, cls] of rows) {
        const tr = doc.createElement("tr");
        const th = doc.createElement("th");
        th.textContent = label;
        const td = doc.createElement("td");
        td.className = cls;
        td.textContent = value;
        tr.append(th, td);
        table.appendChild(tr);
      }
      this.root.appendChild(table);

      const aucTable = doc.createElement("table");
      aucTable.className = "auc-table";
      for (const [category, auc] of Object.entries(metrics.perCategoryAuc)) {
        const tr = doc.createElement("tr");
        const th = doc.createElement("th");
        th.textContent = category;
        const td = doc.createElement("td");
        td.className = "category-auc";
        td.dataset.category = category;
        td.textContent = metricText(auc);
        tr.append(th, td);
        aucTable.appendChild(tr);
      }
      this.root.appendChild(aucTable);
    }

    const chartTitle = doc.createElement("h3");
    chartTitle.textContent = "Category proportions";
    this.root.appendChild(chartTitle);
    if (Object.keys(stats.proportions).length === 0) {
      const empty = doc.createElement("p");
      empty.className = "empty-proportions";
      empty.textContent = "Nothing classified yet — the chart appears once a model is live.";
      this.root.appendChild(empty);
    } else {
      this.root.appendChild(proportionsChart(doc, stats.proportions));
    }
  }
}
