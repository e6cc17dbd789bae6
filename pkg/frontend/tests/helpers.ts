import type { ModelInfo, PredictResponse } from '../src/types';

export const MODELS: ModelInfo[] = [
  {
    id: 'judgment-custody',
    task: 'judgment',
    case_type: 'custody',
    family: 'svm',
    classes: [
      { name: 'تخيير الابناء', gloss: 'child chooses' },
      { name: 'حضانة الاولاد لوالدتهم', gloss: 'mother custody' },
      { name: 'حضانة الاولاد لوالدهم', gloss: 'father custody' },
      { name: 'أخرى', gloss: 'other' },
    ],
  },
  {
    id: 'probability-custody',
    task: 'probability',
    case_type: 'custody',
    family: 'bilstm',
    classes: [
      { name: 'تخيير الابناء', gloss: 'child chooses' },
      { name: 'حضانة الاولاد لوالدتهم', gloss: 'mother custody' },
      { name: 'حضانة الاولاد لوالدهم', gloss: 'father custody' },
      { name: 'أخرى', gloss: 'other' },
    ],
  },
  {
    id: 'evidence-custody',
    task: 'evidence',
    case_type: 'custody',
    family: 'logreg',
    classes: [
      { name: 'حديث تخيير الغلام', gloss: 'choice hadith' },
      { name: 'مصلحة المحضون', gloss: 'best interest' },
      { name: 'البينة والشهود', gloss: 'testimony' },
    ],
  },
];

export function makeResponse(modelId: string, probabilities: number[]): PredictResponse {
  const model = MODELS.find((m) => m.id === modelId)!;
  const entries = model.classes.map((cls, i) => ({
    name: cls.name,
    gloss: cls.gloss,
    probability: probabilities[i]!,
  }));
  const top = probabilities.indexOf(Math.max(...probabilities));
  return {
    model_id: modelId,
    task: model.task,
    case_type: model.case_type,
    predicted_class: model.classes[top]!.name,
    predicted_gloss: model.classes[top]!.gloss,
    probabilities: entries,
    token_count: 12,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function errorResponse(code: string, message: string, status: number): Response {
  return jsonResponse({ error: { code, message } }, status);
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (reason?: unknown) => void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (reason?: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export const APP_HTML = `
  <select id="model-select"></select>
  <select id="evidence-select"></select>
  <div id="claim-wrap" hidden><textarea id="claim-field"></textarea></div>
  <div id="answer-wrap" hidden><textarea id="answer-field"></textarea></div>
  <div id="pleading-wrap"><textarea id="pleading-field"></textarea></div>
  <button id="submit-btn" disabled></button>
  <button id="pin-btn" disabled></button>
  <span id="baseline-note"></span>
  <div id="error-panel" hidden><span id="error-text"></span><button id="retry-btn" hidden></button></div>
  <h2 id="verdict"></h2>
  <div id="bars"></div>
  <h3 id="evidence-verdict"></h3>
  <div id="evidence-bars"></div>
`;
