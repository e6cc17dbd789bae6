import { getModels, predict, ServiceError } from './api';
import { renderBars } from './bars';
import { RequestSequencer } from './sequencer';
import type { ModelInfo, PredictRequest, PredictResponse } from './types';

/** Editable draft plus the latest and pinned responses for comparison. */
export interface DraftState {
  modelId: string;
  evidenceModelId: string;
  claim: string;
  answer: string;
  pleading: string;
  lastResponse: PredictResponse | null;
  baseline: PredictResponse | null;
}

export interface AppHandle {
  state: DraftState;
  readonly models: ModelInfo[];
  submit(): Promise<void>;
  pinBaseline(): void;
  refresh(): Promise<void>;
}

function byId<T extends HTMLElement>(root: ParentNode, id: string): T {
  const el = root.querySelector(`#${id}`);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function selectedModel(models: ModelInfo[], id: string): ModelInfo | undefined {
  return models.find((m) => m.id === id);
}

function requiredFieldsFilled(model: ModelInfo | undefined, state: DraftState): boolean {
  if (!model) return false;
  if (model.task === 'probability') {
    return state.claim.trim() !== '' && state.answer.trim() !== '';
  }
  return state.pleading.trim() !== '';
}

export async function initApp(root: ParentNode, baseUrl: string): Promise<AppHandle> {
  const modelSelect = byId<HTMLSelectElement>(root, 'model-select');
  const evidenceSelect = byId<HTMLSelectElement>(root, 'evidence-select');
  const claimField = byId<HTMLTextAreaElement>(root, 'claim-field');
  const answerField = byId<HTMLTextAreaElement>(root, 'answer-field');
  const pleadingField = byId<HTMLTextAreaElement>(root, 'pleading-field');
  const claimWrap = byId<HTMLElement>(root, 'claim-wrap');
  const answerWrap = byId<HTMLElement>(root, 'answer-wrap');
  const pleadingWrap = byId<HTMLElement>(root, 'pleading-wrap');
  const submitButton = byId<HTMLButtonElement>(root, 'submit-btn');
  const pinButton = byId<HTMLButtonElement>(root, 'pin-btn');
  const errorPanel = byId<HTMLElement>(root, 'error-panel');
  const retryButton = byId<HTMLButtonElement>(root, 'retry-btn');
  const verdict = byId<HTMLElement>(root, 'verdict');
  const bars = byId<HTMLElement>(root, 'bars');
  const evidenceVerdict = byId<HTMLElement>(root, 'evidence-verdict');
  const evidenceBars = byId<HTMLElement>(root, 'evidence-bars');
  const baselineNote = byId<HTMLElement>(root, 'baseline-note');

  const sequencer = new RequestSequencer();
  const state: DraftState = {
    modelId: '',
    evidenceModelId: '',
    claim: '',
    answer: '',
    pleading: '',
    lastResponse: null,
    baseline: null,
  };
  let models: ModelInfo[] = [];

  function syncControls(): void {
    const model = selectedModel(models, state.modelId);
    const probability = model?.task === 'probability';
    claimWrap.hidden = !probability;
    answerWrap.hidden = !probability;
    pleadingWrap.hidden = !!probability;
    submitButton.disabled = !requiredFieldsFilled(model, state);
    pinButton.disabled = state.lastResponse === null;
  }

  function showError(err: unknown): void {
    const code = err instanceof ServiceError ? err.code : 'internal';
    const message = err instanceof Error ? err.message : String(err);
    errorPanel.hidden = false;
    byId<HTMLElement>(root, 'error-text').textContent = `${code}: ${message}`;
    retryButton.hidden = code !== 'unreachable';
  }

  function clearError(): void {
    errorPanel.hidden = true;
    retryButton.hidden = true;
  }

  function renderResponse(response: PredictResponse): void {
    state.lastResponse = response;
    verdict.textContent = `${response.predicted_class} — ${response.predicted_gloss}`;
    const baseline =
      state.baseline && state.baseline.model_id === response.model_id
        ? state.baseline.probabilities.map((p) => p.probability)
        : undefined;
    renderBars(bars, response.probabilities, baseline);
    if (response.evidence) {
      evidenceVerdict.textContent = response.evidence.predicted_class;
      renderBars(evidenceBars, response.evidence.probabilities);
    } else {
      evidenceVerdict.textContent = '';
      evidenceBars.textContent = '';
    }
    syncControls();
  }

  async function submit(): Promise<void> {
    const model = selectedModel(models, state.modelId);
    if (!requiredFieldsFilled(model, state)) return;
    const request: PredictRequest = { model_id: state.modelId };
    if (model!.task === 'probability') {
      request.claim = state.claim;
      request.answer = state.answer;
    } else {
      request.pleading = state.pleading;
    }
    if (state.evidenceModelId) request.evidence_model_id = state.evidenceModelId;
    const ticket = sequencer.issue();
    try {
      const response = await predict(baseUrl, request);
      if (!sequencer.shouldApply(ticket)) return; // a newer response already rendered
      clearError();
      renderResponse(response);
    } catch (err) {
      if (!sequencer.shouldApply(ticket)) return;
      showError(err);
    }
  }

  function pinBaseline(): void {
    if (!state.lastResponse) return;
    state.baseline = state.lastResponse;
    baselineNote.textContent = `baseline pinned: ${state.baseline.predicted_class}`;
    renderResponse(state.lastResponse);
  }

  async function refresh(): Promise<void> {
    models = await getModels(baseUrl);
    modelSelect.textContent = '';
    evidenceSelect.textContent = '';
    const none = modelSelect.ownerDocument.createElement('option');
    none.value = '';
    none.textContent = '(no evidence model)';
    evidenceSelect.appendChild(none);
    for (const model of models) {
      const option = modelSelect.ownerDocument.createElement('option');
      option.value = model.id;
      option.textContent = `${model.id} — ${model.task}/${model.case_type}`;
      if (model.task === 'evidence') {
        evidenceSelect.appendChild(option);
      } else {
        modelSelect.appendChild(option);
      }
    }
    const first = models.find((m) => m.task !== 'evidence');
    state.modelId = first ? first.id : '';
    modelSelect.value = state.modelId;
    syncControls();
  }

  modelSelect.addEventListener('change', () => {
    state.modelId = modelSelect.value;
    state.baseline = null;
    baselineNote.textContent = '';
    syncControls();
  });
  evidenceSelect.addEventListener('change', () => {
    state.evidenceModelId = evidenceSelect.value;
  });
  claimField.addEventListener('input', () => {
    state.claim = claimField.value;
    syncControls();
  });
  answerField.addEventListener('input', () => {
    state.answer = answerField.value;
    syncControls();
  });
  pleadingField.addEventListener('input', () => {
    state.pleading = pleadingField.value;
    syncControls();
  });
  async function retry(): Promise<void> {
    if (models.length === 0) {
      try {
        await refresh();
        clearError();
      } catch (err) {
        showError(err);
      }
      return;
    }
    await submit();
  }

  submitButton.addEventListener('click', () => void submit());
  retryButton.addEventListener('click', () => void retry());
  pinButton.addEventListener('click', () => pinBaseline());

  try {
    await refresh();
    clearError();
  } catch (err) {
    showError(err);
  }

  return {
    state,
    get models() {
      return models;
    },
    submit,
    pinBaseline,
    refresh,
  };
}
