import type { ModelInfo, PredictRequest, PredictResponse } from './types';

/** Error carrying the service's structured code + message. */
export class ServiceError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.code = code;
    this.name = 'ServiceError';
  }
}

async function parseError(response: Response): Promise<ServiceError> {
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string } };
    if (body.error?.code && body.error.message) {
      return new ServiceError(body.error.code, body.error.message);
    }
  } catch {
    // fall through to the generic error
  }
  return new ServiceError('http_error', `request failed with status ${response.status}`);
}

export async function getModels(baseUrl: string): Promise<ModelInfo[]> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/models`);
  } catch (err) {
    throw new ServiceError('unreachable', `service unreachable: ${String(err)}`);
  }
  if (!response.ok) throw await parseError(response);
  const body = (await response.json()) as { models: ModelInfo[] };
  return body.models;
}

export async function predict(baseUrl: string, request: PredictRequest): Promise<PredictResponse> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/predict`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
  } catch (err) {
    throw new ServiceError('unreachable', `service unreachable: ${String(err)}`);
  }
  if (!response.ok) throw await parseError(response);
  return (await response.json()) as PredictResponse;
}
