/** Wire types for the prediction service. */

export interface ClassInfo {
  name: string; // Arabic class name
  gloss: string; // English gloss, shown as a tooltip
}

export interface ModelInfo {
  id: string;
  task: 'judgment' | 'evidence' | 'probability';
  case_type: 'custody' | 'annulment';
  family: string;
  classes: ClassInfo[];
}

export interface ClassProbability {
  name: string;
  gloss: string;
  probability: number;
}

export interface PredictResponse {
  model_id: string;
  task: string;
  case_type: string;
  predicted_class: string;
  predicted_gloss: string;
  probabilities: ClassProbability[];
  token_count: number;
  evidence?: {
    model_id: string;
    predicted_class: string;
    predicted_gloss: string;
    probabilities: ClassProbability[];
  };
}

export interface PredictRequest {
  model_id: string;
  claim?: string;
  answer?: string;
  pleading?: string;
  evidence_model_id?: string;
}
