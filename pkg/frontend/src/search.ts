import { ApiError, WntagsClient } from "./api";
import { formatRelevance } from "./format";
import type { RankedResultWire, SearchResponseWire, SearchView } from "./types";

/**
 * Render the ranked grid. The grid does no sorting or scoring of its own:
 * cells appear exactly in the order the API returned them.
 */
export function renderResults(container: HTMLElement, response: SearchResponseWire): void {
  container.textContent = "";
  if (response.results.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No images match this query and filter.";
    container.appendChild(empty);
    return;
  }
  const grid = document.createElement("div");
  grid.className = "result-grid";
  for (const result of response.results) {
    grid.appendChild(renderCell(result));
  }
  container.appendChild(grid);
}

function renderCell(result: RankedResultWire): HTMLElement {
  const cell = document.createElement("figure");
  cell.className = "result-cell";
  cell.dataset.imageId = result.image_id;

  const thumb = document.createElement("img");
  thumb.src = result.image.source_ref;
  thumb.alt = result.image.iaps_keyword;
  cell.appendChild(thumb);

  const caption = document.createElement("figcaption");
  const label = document.createElement("span");
  label.textContent = `${result.image_id} (${result.image.iaps_keyword})`;
  const relevance = document.createElement("span");
  relevance.className = "relevance";
  relevance.textContent = formatRelevance(result.relevance);
  caption.append(label, " ", relevance);
  cell.appendChild(caption);

  // contribution breakdown, revealed on click
  const breakdown = document.createElement("ul");
  breakdown.className = "contributions";
  breakdown.hidden = true;
  for (const c of result.contributions) {
    const li = document.createElement("li");
    li.textContent =
      `${c.query_synset} -> ${c.image_synset}: w=${c.mean_weight} sim=${c.sim}`;
    breakdown.appendChild(li);
  }
  cell.appendChild(breakdown);
  cell.addEventListener("click", () => {
    breakdown.hidden = !breakdown.hidden;
  });
  return cell;
}

function renderHint(container: HTMLElement, className: string, text: string): void {
  container.textContent = "";
  const hint = document.createElement("p");
  hint.className = className;
  hint.textContent = text;
  container.appendChild(hint);
}

/**
 * Run one search interaction: validate, query, render.
 *
 * An empty query never reaches the network. NoSenseFound renders as an
 * inline hint listing the tokens the service could not match; other API
 * errors surface with their machine code.
 */
export async function searchFlow(
  client: WntagsClient,
  container: HTMLElement,
  view: SearchView,
): Promise<SearchResponseWire | null> {
  if (view.query.trim() === "") {
    renderHint(container, "validation-hint", "Type a query first.");
    return null;
  }
  let response: SearchResponseWire;
  try {
    response = await client.search(view);
  } catch (err) {
    if (err instanceof ApiError && err.code === "NoSenseFound") {
      renderHint(container, "no-sense-hint",
        `No matching concept for: ${err.unmatched.join(", ")}`);
      return null;
    }
    if (err instanceof ApiError) {
      renderHint(container, "error-hint", `${err.code}: ${err.message}`);
      return null;
    }
    throw err;
  }
  renderResults(container, response);
  return response;
}
