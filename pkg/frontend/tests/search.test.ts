// Contract tests for the search panel against recorded API responses.
// The core invariant: the UI does no ranking of its own.

import { beforeEach, describe, expect, it } from "vitest";

import { WntagsClient } from "../src/api";
import { searchFlow } from "../src/search";
import { makeMockServer } from "./mock-server";
import searchDog from "./fixtures/search_dog.json";
import searchAttackDog from "./fixtures/search_attack_dog.json";

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="results"></div>';
  container = document.getElementById("results")!;
});

function setup() {
  const mock = makeMockServer();
  return { api: new WntagsClient("http://mock", mock.fetch), mock };
}

function renderedIds(): string[] {
  return [...container.querySelectorAll<HTMLElement>(".result-cell")]
    .map((el) => el.dataset.imageId!);
}

describe("searchFlow", () => {
  it("renders results in exactly the API's order", async () => {
    const { api } = setup();
    await searchFlow(api, container, { query: "dog", affect: {} });
    expect(renderedIds()).toEqual(searchDog.results.map((r) => r.image_id));
  });

  it("renders the replayed collocation query in its order too", async () => {
    const { api } = setup();
    await searchFlow(api, container, { query: "attack dog", affect: {} });
    expect(renderedIds()).toEqual(searchAttackDog.results.map((r) => r.image_id));
  });

  it("shows relevance with exactly 3 decimals", async () => {
    const { api } = setup();
    await searchFlow(api, container, { query: "dog", affect: {} });
    const shown = [...container.querySelectorAll(".relevance")].map((el) => el.textContent);
    expect(shown).toEqual(["0.682", "0.375", "0.313", "0.096"]);
    for (const text of shown) {
      expect(text).toMatch(/^\d\.\d{3}$/);
    }
  });

  it("sends no request for an empty query", async () => {
    const { api, mock } = setup();
    const res = await searchFlow(api, container, { query: "   ", affect: {} });
    expect(res).toBeNull();
    expect(mock.calls).toHaveLength(0);
    expect(container.querySelector(".validation-hint")).not.toBeNull();
  });

  it("renders NoSenseFound as an inline hint listing unmatched tokens", async () => {
    const { api } = setup();
    const res = await searchFlow(api, container, { query: "purple unicorn", affect: {} });
    expect(res).toBeNull();
    const hint = container.querySelector(".no-sense-hint");
    expect(hint).not.toBeNull();
    expect(hint!.textContent).toContain("purple");
    expect(hint!.textContent).toContain("unicorn");
  });

  it("shows the empty state when the affect filter excludes everything", async () => {
    const { api } = setup();
    const res = await searchFlow(api, container,
      { query: "dog", affect: { valMin: 8.5 } });
    expect(res!.count).toBe(0);
    expect(container.querySelector(".empty-state")).not.toBeNull();
    expect(renderedIds()).toEqual([]);
  });

  it("reveals the contribution breakdown on click", async () => {
    const { api } = setup();
    await searchFlow(api, container, { query: "dog", affect: {} });
    const cell = container.querySelector<HTMLElement>(".result-cell")!;
    const breakdown = cell.querySelector<HTMLElement>(".contributions")!;
    expect(breakdown.hidden).toBe(true);
    cell.click();
    expect(breakdown.hidden).toBe(false);
    expect(breakdown.children.length).toBe(searchDog.results[0]!.contributions.length);
  });
});
