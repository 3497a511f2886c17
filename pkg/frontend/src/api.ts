import type { ScreenDescriptor, SessionInfo, SubmitAck, SubmitBody } from "./types.js";

/** The server reported the session has no screens left. */
export class SessionFinishedError extends Error {}

/** The server already holds a response for this screen (e.g. a retried submit). */
export class DuplicateResponseError extends Error {}

/** Transport-level failure; safe to retry, session state lives server-side. */
export class NetworkError extends Error {}

async function parseDetail(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { detail?: string };
    return body.detail ?? resp.statusText;
  } catch {
    return resp.statusText;
  }
}

/** Thin typed client over the trial service HTTP+JSON API. */
export class TrialApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    return resp;
  }

  async createSession(planId: string, participant: string, seed: number): Promise<SessionInfo> {
    const resp = await this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ plan_id: planId, participant, seed }),
    });
    if (!resp.ok) throw new Error(await parseDetail(resp));
    return (await resp.json()) as SessionInfo;
  }

  async nextScreen(sessionId: string): Promise<ScreenDescriptor> {
    const resp = await this.request(`/sessions/${sessionId}/next`);
    if (resp.status === 409) throw new SessionFinishedError(await parseDetail(resp));
    if (!resp.ok) throw new Error(await parseDetail(resp));
    return (await resp.json()) as ScreenDescriptor;
  }

  async submit(sessionId: string, body: SubmitBody): Promise<SubmitAck> {
    const resp = await this.request(`/sessions/${sessionId}/responses`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (resp.status === 409) throw new DuplicateResponseError(await parseDetail(resp));
    if (!resp.ok) throw new Error(await parseDetail(resp));
    return (await resp.json()) as SubmitAck;
  }

  stimulusUrl(path: string): string {
    return path.startsWith("http") ? path : `${this.baseUrl}${path}`;
  }
}
