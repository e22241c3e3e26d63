/** Payload shapes of the inference service endpoints. */

export interface ImageSummary {
  image_id: string;
  width: number;
  height: number;
  thumbnail_uri: string | null;
}

export interface ImageListPage {
  images: ImageSummary[];
  page: number;
  pages: number;
  total: number;
}

export interface ImageDetail {
  image_id: string;
  width: number;
  height: number;
  image_uri: string | null;
  png_base64?: string;
}

export interface AttentionBox {
  box: { x: number; y: number; w: number; h: number };
  weight: number;
}

export interface AnswerResponse {
  answer: string;
  scores: { label: string; prob: number }[];
  attention: { local?: AttentionBox[]; global?: AttentionBox[] };
  latency_ms: number;
}

export interface SessionEntry {
  imageId: string;
  click: { x: number; y: number };
  question: string;
  answer: string;
  scores: { label: string; prob: number }[];
  attention: { local?: AttentionBox[]; global?: AttentionBox[] };
  timestamp: number;
}
