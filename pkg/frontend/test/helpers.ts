import {
  DuplicateResponseError,
  NetworkError,
  SessionFinishedError,
  TrialApi,
} from "../src/api.js";
import type { RunnerHooks, RunnerUi } from "../src/runner.js";
import type { ScreenDescriptor, ScreenView, SubmitBody } from "../src/types.js";

/** Manual monotonic clock + timer wheel; advance() fires due timers in order. */
export class ManualClock {
  private t = 0;
  private seq = 0;
  private timers = new Map<number, { due: number; fn: () => void }>();

  now(): number {
    return this.t;
  }

  setTimer(fn: () => void, ms: number): unknown {
    this.seq += 1;
    this.timers.set(this.seq, { due: this.t + ms, fn });
    return this.seq;
  }

  clearTimer(handle: unknown): void {
    this.timers.delete(handle as number);
  }

  async advance(ms: number): Promise<void> {
    // settle pending continuations first so timers they create or cancel
    // are visible to the scan below
    await flushMicrotasks();
    const target = this.t + ms;
    for (;;) {
      let nextId = -1;
      let nextDue = Infinity;
      for (const [id, timer] of this.timers) {
        if (timer.due <= target && (timer.due < nextDue || (timer.due === nextDue && id < nextId))) {
          nextId = id;
          nextDue = timer.due;
        }
      }
      if (nextId < 0) break;
      const timer = this.timers.get(nextId)!;
      this.timers.delete(nextId);
      this.t = timer.due;
      timer.fn();
      await flushMicrotasks();
    }
    this.t = target;
    await flushMicrotasks();
  }

  hooks(loadImages: RunnerHooks["loadImages"]): RunnerHooks {
    return {
      now: () => this.now(),
      setTimer: (fn, ms) => this.setTimer(fn, ms),
      clearTimer: (h) => this.clearTimer(h),
      loadImages,
    };
  }
}

export async function flushMicrotasks(rounds = 20): Promise<void> {
  for (let i = 0; i < rounds; i += 1) await Promise.resolve();
}

export function makeScreen(index: number, total = 3, limitS = 20): ScreenDescriptor {
  return {
    screen_index: index,
    total,
    phase: "phase1",
    question_type: "emotion",
    prompt: "Which face looks happy?",
    choices: [0, 1, 2, 3].map((i) => ({
      stimulus: `stim${index}-${i}`,
      url: `/stimuli/stim${index}-${i}.png`,
    })),
    time_limit_s: limitS,
  };
}

interface FakeApiOptions {
  screens: ScreenDescriptor[];
  nextFailures?: number;
  submitFailures?: number;
  duplicateAfterFailure?: boolean;
}

/** Scripted server double: serves screens in order, then reports finished. */
export class FakeApi extends TrialApi {
  submissions: SubmitBody[] = [];
  submitAttempts = 0;
  private cursor = 0;
  private nextFailuresLeft: number;
  private submitFailuresLeft: number;
  private readonly duplicateAfterFailure: boolean;

  constructor(private readonly opts: FakeApiOptions) {
    super("http://test.invalid");
    this.nextFailuresLeft = opts.nextFailures ?? 0;
    this.submitFailuresLeft = opts.submitFailures ?? 0;
    this.duplicateAfterFailure = opts.duplicateAfterFailure ?? false;
  }

  override async nextScreen(): Promise<ScreenDescriptor> {
    if (this.nextFailuresLeft > 0) {
      this.nextFailuresLeft -= 1;
      throw new NetworkError("offline");
    }
    const screen = this.opts.screens[this.cursor];
    if (!screen) throw new SessionFinishedError("session finished");
    return screen;
  }

  override async submit(_sessionId: string, body: SubmitBody) {
    this.submitAttempts += 1;
    if (this.submitFailuresLeft > 0) {
      this.submitFailuresLeft -= 1;
      // the request reached the server before the reply was lost
      this.submissions.push(body);
      this.cursor += 1;
      throw new NetworkError("reply lost");
    }
    if (this.duplicateAfterFailure && this.submissions.some((s) => s.screen_index === body.screen_index)) {
      throw new DuplicateResponseError("already answered");
    }
    this.submissions.push(body);
    this.cursor += 1;
    return { ok: true, screen_index: body.screen_index, finished: this.cursor >= this.opts.screens.length };
  }
}

export class FakeUi implements RunnerUi {
  views: ScreenView[] = [];
  countdowns: number[] = [];
  interstitials = 0;
  completions = 0;
  errors: string[] = [];
  onAnswer: ((choice: number) => void) | null = null;

  showScreen(view: ScreenView, onAnswer: (choice: number) => void): void {
    this.views.push(view);
    this.onAnswer = onAnswer;
  }

  updateCountdown(remainingSeconds: number): void {
    this.countdowns.push(remainingSeconds);
  }

  showInterstitial(): void {
    this.interstitials += 1;
    this.onAnswer = null;
  }

  showCompletion(): void {
    this.completions += 1;
  }

  showError(message: string): void {
    this.errors.push(message);
  }
}

/** Image loader whose decode moment the test controls per screen. */
export class ManualImageLoader {
  private pending: Array<() => void> = [];
  calls: string[][] = [];
  autoResolve = true;

  load = (urls: string[]): Promise<void> => {
    this.calls.push(urls);
    if (this.autoResolve) return Promise.resolve();
    return new Promise((resolve) => this.pending.push(resolve));
  };

  async resolveDecode(): Promise<void> {
    const resolve = this.pending.shift();
    if (!resolve) throw new Error("no pending decode");
    resolve();
    await flushMicrotasks();
  }
}
