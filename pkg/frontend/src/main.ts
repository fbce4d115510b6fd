// Browser wiring for the two panels. All logic lives in the flow modules;
// this file only reads controls and calls them.

import { WntagsClient } from "./api";
import { annotateFlow } from "./annotate";
import { searchFlow } from "./search";
import type { AffectRanges, AnnotationDraft, SearchView } from "./types";

const client = new WntagsClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function optionalNumber(input: HTMLInputElement): number | undefined {
  return input.value.trim() === "" ? undefined : Number(input.value);
}

// -- search panel -------------------------------------------------------

function currentView(): SearchView {
  const affect: AffectRanges = {
    valMin: optionalNumber(el<HTMLInputElement>("val-min")),
    valMax: optionalNumber(el<HTMLInputElement>("val-max")),
    arMin: optionalNumber(el<HTMLInputElement>("ar-min")),
    arMax: optionalNumber(el<HTMLInputElement>("ar-max")),
    domMin: optionalNumber(el<HTMLInputElement>("dom-min")),
    domMax: optionalNumber(el<HTMLInputElement>("dom-max")),
  };
  return {
    query: el<HTMLInputElement>("query").value,
    dMax: optionalNumber(el<HTMLInputElement>("d-max")),
    limit: optionalNumber(el<HTMLInputElement>("limit")),
    affect,
  };
}

function runSearch(): void {
  void searchFlow(client, el("results"), currentView());
}

// -- annotation panel ---------------------------------------------------

let pickedSynsets: string[] = [];

async function refreshCompletions(): Promise<void> {
  const lemma = el<HTMLInputElement>("lemma").value.trim();
  const list = el<HTMLDataListElement>("lemma-options");
  list.textContent = "";
  pickedSynsets = [];
  if (lemma === "") return;
  const matches = await client.lemmas(lemma, 12);
  for (const m of matches) {
    const option = document.createElement("option");
    option.value = m.lemma;
    list.appendChild(option);
    if (m.lemma === lemma) pickedSynsets = m.synsets;
  }
}

function currentDraft(): AnnotationDraft {
  const weight = Number(el<HTMLInputElement>("weight").value);
  return {
    imageId: el<HTMLInputElement>("image-id").value.trim(),
    annotator: el<HTMLInputElement>("annotator").value.trim(),
    pending: pickedSynsets.slice(0, 1).map((synset) => ({
      sense: { synset, lemma: el<HTMLInputElement>("lemma").value.trim() },
      weight,
    })),
  };
}

function runAnnotate(): void {
  void annotateFlow(client, {
    record: el("record"),
    agreement: el("agreement"),
    error: el("annotate-error"),
  }, currentDraft());
}

// keep the slider and the free decimal field in sync, slider wins on drag
function syncWeight(from: HTMLInputElement, to: HTMLInputElement): void {
  from.addEventListener("input", () => {
    to.value = from.value;
  });
}

export function boot(): void {
  el<HTMLButtonElement>("search-btn").addEventListener("click", runSearch);
  el<HTMLInputElement>("query").addEventListener("keydown", (e) => {
    if (e.key === "Enter") runSearch();
  });
  for (const id of ["d-max", "val-min", "val-max", "ar-min", "ar-max", "dom-min", "dom-max"]) {
    el<HTMLInputElement>(id).addEventListener("change", runSearch);
  }
  el<HTMLInputElement>("lemma").addEventListener("input", () => {
    void refreshCompletions();
  });
  syncWeight(el("weight-slider"), el("weight"));
  syncWeight(el("weight"), el("weight-slider"));
  el<HTMLButtonElement>("annotate-btn").addEventListener("click", runAnnotate);
}

if (typeof document !== "undefined" && document.getElementById("search-btn")) {
  boot();
}
