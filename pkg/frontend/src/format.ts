import type { ImageRecordWire } from "./types";

/** Relevance is always displayed with exactly 3 decimals. */
export function formatRelevance(value: number): string {
  return value.toFixed(3);
}

/** Weights render with two decimals; slider steps are exact hundredths. */
export function formatWeight(value: number): string {
  return value.toFixed(2);
}

export function formatKappa(value: number): string {
  return value.toFixed(3);
}

export const MIN_SENSES = 3;
export const MIN_ANNOTATORS = 2;

/**
 * The publishability rule, client-side: an image needs at least 3 distinct
 * senses from at least 2 annotators. Returns a warning string or null.
 */
export function publishabilityWarning(record: ImageRecordWire): string | null {
  const missing: string[] = [];
  if (record.weighted_tags.length < MIN_SENSES) {
    missing.push(`needs at least ${MIN_SENSES} distinct senses ` +
      `(has ${record.weighted_tags.length})`);
  }
  if (record.annotators.length < MIN_ANNOTATORS) {
    missing.push(`needs at least ${MIN_ANNOTATORS} annotators ` +
      `(has ${record.annotators.length})`);
  }
  if (missing.length === 0) return null;
  return `Not publishable yet: ${missing.join("; ")}.`;
}
