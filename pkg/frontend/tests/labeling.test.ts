// The labeling round trip: task rendered with categories and
// descriptions, a vote immediately brings up the next task, keyboard
// shortcuts vote in schema order.

import { beforeEach, describe, expect, it } from "vitest";

import { TriageApi } from "../src/api.js";
import { LabelingScreen } from "../src/views/labeling.js";
import { FakeBackend, HEALTH_CATEGORIES } from "./fakeBackend.js";

let backend: FakeBackend;
let api: TriageApi;
let root: HTMLElement;

beforeEach(() => {
  backend = new FakeBackend(HEALTH_CATEGORIES);
  api = new TriageApi("http://fake", backend.fetch);
  document.body.innerHTML = '<main id="view"></main>';
  root = document.getElementById("view") as HTMLElement;
});

describe("LabelingScreen", () => {
  it("renders the task text and all eight categories with descriptions", async () => {
    backend.addTask("Where does HIV come frm?");
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    expect(root.querySelector(".task-text")?.textContent).toBe(
      "Where does HIV come frm?",
    );
    const buttons = root.querySelectorAll(".category-button");
    expect(buttons).toHaveLength(8);
    expect(buttons[0].textContent).toContain("1. Symptoms");
    expect(buttons[0].textContent).toContain("Body signs");
    expect((buttons[3] as HTMLButtonElement).title).toBe("Where and when to test");
  });

  it("votes on click and immediately shows the next task", async () => {
    backend.addTask("first question");
    backend.addTask("second question");
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    const button = root.querySelector<HTMLButtonElement>(
      '.category-button[data-category="Treatment"]',
    );
    button?.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(backend.tasks[0].votes.get("expert1")).toBe("Treatment");
    expect(root.querySelector(".task-text")?.textContent).toBe(
      "second question",
    );
  });

  it("maps number keys to categories in schema order", async () => {
    backend.addTask("keyboard question");
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    screen.handleKey("5");
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(backend.tasks[0].votes.get("expert1")).toBe("Treatment");
  });

  it("shows the idle state when no task is available", async () => {
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    expect(screen.idle).toBe(true);
    expect(root.querySelector(".idle-note")).not.toBeNull();
  });

  it("does not serve a task the labeler already voted on", async () => {
    backend.addTask("only question");
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    await screen.voteCategory("Symptoms");
    expect(screen.idle).toBe(true);
  });

  it("round trip completes within one poll interval", async () => {
    // the criterion: fetch -> vote -> next task visible without waiting
    // for a second poll; voteCategory chains the refresh itself
    backend.addTask("al pha");
    backend.addTask("be ta");
    const screen = new LabelingScreen(root, api, "expert1", "s0001");
    await screen.refresh();
    const started = Date.now();
    await screen.voteCategory("Prevention");
    expect(Date.now() - started).toBeLessThan(3000); // one poll interval
    expect(root.querySelector(".task-text")?.textContent).toBe("be ta");
  });
});
