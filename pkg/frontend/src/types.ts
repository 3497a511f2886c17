export interface ChoiceRef {
  stimulus: string;
  url: string;
}

export interface ScreenDescriptor {
  screen_index: number;
  total: number;
  phase: string;
  question_type: string;
  prompt: string;
  choices: ChoiceRef[];
  time_limit_s: number;
}

export interface SessionInfo {
  session_id: string;
  screens_total: number;
  time_limit_s: number;
}

export interface SubmitBody {
  screen_index: number;
  choice: number | null;
  timeout: boolean;
  client_elapsed_ms: number;
}

export interface SubmitAck {
  ok: boolean;
  screen_index: number;
  finished: boolean;
}

/** What the participant sees for one question. Always exactly four images. */
export interface ScreenView {
  prompt: string;
  urls: [string, string, string, string];
  index: number;
  total: number;
  remainingSeconds: number;
}

export type AnswerOutcome =
  | { kind: "choice"; choice: number }
  | { kind: "timeout" };
