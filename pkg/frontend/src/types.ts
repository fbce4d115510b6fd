// Wire types mirroring the service's JSON payloads.

export interface EmotionWire {
  val: number;
  ar: number;
  dom: number;
}

export interface SenseRef {
  synset: string;
  lemma: string;
}

export interface WeightedTagWire {
  synset: string;
  lemma: string;
  mean_weight: number;
  rater_count: number;
}

export interface AssignmentWire {
  annotator: string;
  synset: string;
  lemma: string;
  weight: number;
}

export interface ImageRecordWire {
  id: string;
  source_ref: string;
  iaps_keyword: string;
  emotion: EmotionWire;
  publishable: boolean;
  annotators: string[];
  weighted_tags: WeightedTagWire[];
  assignments: AssignmentWire[];
}

export interface ContributionWire {
  query_synset: string;
  image_synset: string;
  mean_weight: number;
  sim: number;
}

export interface ImageStubWire {
  source_ref: string;
  iaps_keyword: string;
  emotion: EmotionWire;
}

export interface RankedResultWire {
  image_id: string;
  raw_score: number;
  relevance: number;
  contributions: ContributionWire[];
  image: ImageStubWire;
}

export interface MatchedSpanWire {
  lemma: string;
  tokens: [number, number];
  synsets: string[];
}

export interface QueryEchoWire {
  raw_text: string;
  d_max: number;
  matched: MatchedSpanWire[];
  unmatched: string[];
}

export interface SearchResponseWire {
  mode: "semantic";
  query: QueryEchoWire;
  results: RankedResultWire[];
  count: number;
}

export interface AgreementWire {
  kappa: number;
  flagged: string[];
  low_agreement: boolean;
  subjects: number;
  raters: number;
}

export interface LemmaMatchWire {
  lemma: string;
  synsets: string[];
}

export interface TagStatsWire {
  median: number;
  mean: number;
  sd: number;
  min: number;
  max: number;
  n_images: number;
}

// Client-side state.

/** One pending sense+weight pair before submission. */
export interface PendingTag {
  sense: SenseRef;
  weight: number;
}

/** Mirrors TagAssignment constraints client-side before anything is posted. */
export interface AnnotationDraft {
  imageId: string;
  annotator: string;
  pending: PendingTag[];
}

export interface AffectRanges {
  valMin?: number;
  valMax?: number;
  arMin?: number;
  arMax?: number;
  domMin?: number;
  domMax?: number;
}

/** State behind the search panel: query text plus the range controls. */
export interface SearchView {
  query: string;
  dMax?: number;
  limit?: number;
  affect: AffectRanges;
}
