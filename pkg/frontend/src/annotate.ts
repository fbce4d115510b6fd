import { ApiError, WntagsClient } from "./api";
import { formatKappa, formatWeight, publishabilityWarning } from "./format";
import type { AgreementWire, AnnotationDraft, ImageRecordWire } from "./types";

/** Client-side mirror of the server's assignment constraints. */
export function validateDraft(draft: AnnotationDraft): string[] {
  const problems: string[] = [];
  if (draft.annotator.trim() === "") {
    problems.push("annotator id is required");
  }
  if (draft.pending.length === 0) {
    problems.push("pick at least one sense");
  }
  for (const tag of draft.pending) {
    if (!tag.sense.synset || !tag.sense.lemma) {
      problems.push("every pending tag needs a resolved sense");
    }
    if (!(tag.weight >= 0 && tag.weight <= 1)) {
      problems.push(`weight ${tag.weight} outside [0, 1]`);
    }
  }
  return problems;
}

/**
 * Post every pending sense in order; the server applies each one durably
 * before answering. Returns the record as of the last acknowledgement.
 */
export async function submitDraft(
  client: WntagsClient,
  draft: AnnotationDraft,
): Promise<ImageRecordWire> {
  const problems = validateDraft(draft);
  if (problems.length > 0) {
    throw new Error(`invalid draft: ${problems.join("; ")}`);
  }
  let record: ImageRecordWire | null = null;
  for (const tag of draft.pending) {
    record = await client.annotate(draft.imageId, draft.annotator, tag.sense, tag.weight);
  }
  return record!;
}

export function renderRecord(container: HTMLElement, record: ImageRecordWire): void {
  container.textContent = "";
  const list = document.createElement("ul");
  list.className = "tag-list";
  for (const tag of record.weighted_tags) {
    const li = document.createElement("li");
    li.dataset.synset = tag.synset;
    li.textContent =
      `${tag.lemma} (${tag.synset}) w=${formatWeight(tag.mean_weight)} ` +
      `from ${tag.rater_count} rater${tag.rater_count === 1 ? "" : "s"}`;
    list.appendChild(li);
  }
  container.appendChild(list);

  const annotators = document.createElement("p");
  annotators.className = "annotators";
  annotators.textContent = `Annotators: ${record.annotators.join(", ")}`;
  container.appendChild(annotators);

  const warning = publishabilityWarning(record);
  if (warning !== null) {
    const el = document.createElement("p");
    el.className = "publishability-warning";
    el.textContent = warning;
    container.appendChild(el);
  }
}

export function renderAgreement(
  container: HTMLElement,
  report: AgreementWire | ApiError,
): void {
  container.textContent = "";
  if (report instanceof ApiError) {
    const el = document.createElement("p");
    el.className = "agreement-unavailable";
    el.textContent = `${report.code}: ${report.message}`;
    container.appendChild(el);
    return;
  }
  const kappa = document.createElement("p");
  kappa.className = report.low_agreement ? "kappa low-agreement" : "kappa";
  kappa.textContent =
    `Fleiss kappa ${formatKappa(report.kappa)} ` +
    `(${report.raters} raters, ${report.subjects} senses)` +
    (report.low_agreement ? " - low agreement" : "");
  container.appendChild(kappa);
  if (report.flagged.length > 0) {
    const flagged = document.createElement("p");
    flagged.className = "flagged-tags";
    flagged.textContent = `Disputed: ${report.flagged.join(", ")}`;
    container.appendChild(flagged);
  }
}

export interface AnnotatePanels {
  record: HTMLElement;
  agreement: HTMLElement;
  error: HTMLElement;
}

/**
 * Full annotation interaction: submit the draft, then refresh the record
 * view and the agreement panel from the API. API errors surface verbatim
 * with their machine code.
 */
export async function annotateFlow(
  client: WntagsClient,
  panels: AnnotatePanels,
  draft: AnnotationDraft,
): Promise<ImageRecordWire | null> {
  panels.error.textContent = "";
  let record: ImageRecordWire;
  try {
    record = await submitDraft(client, draft);
  } catch (err) {
    if (err instanceof ApiError) {
      panels.error.textContent = `${err.code}: ${err.message}`;
      return null;
    }
    throw err;
  }
  renderRecord(panels.record, record);
  try {
    renderAgreement(panels.agreement, await client.agreement(draft.imageId));
  } catch (err) {
    if (err instanceof ApiError) {
      // e.g. InsufficientRaters on a single-annotator record
      renderAgreement(panels.agreement, err);
    } else {
      throw err;
    }
  }
  return record;
}
