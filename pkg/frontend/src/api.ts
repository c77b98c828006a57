import type { ActionPayload, ActionResponse, ExplanationRecord, SessionView } from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly base: string = '') {}

  createSession(world: Record<string, unknown>): Promise<SessionView> {
    return request(`${this.base}/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ world }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${id}`);
  }

  submitAction(id: string, action: ActionPayload): Promise<ActionResponse> {
    return request(`${this.base}/sessions/${id}/action`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ action }),
    });
  }

  finish(id: string): Promise<{ session_id: string; pairs: number; demo_file: string }> {
    return request(`${this.base}/sessions/${id}/finish`, { method: 'POST' });
  }

  explain(id: string, weights: string): Promise<ExplanationRecord> {
    const params = new URLSearchParams({ weights });
    return request(`${this.base}/sessions/${id}/explain?${params}`);
  }
}
