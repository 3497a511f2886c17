import {
  DuplicateResponseError,
  NetworkError,
  SessionFinishedError,
  TrialApi,
} from "./api.js";
import type { AnswerOutcome, ScreenDescriptor, ScreenView } from "./types.js";

/**
 * Injectable environment. Production uses performance.now / setTimeout and
 * real image decoding; tests drive a manual clock so the timing contract is
 * checked deterministically.
 */
export interface RunnerHooks {
  /** Monotonic milliseconds; never affected by wall-clock adjustments. */
  now(): number;
  setTimer(fn: () => void, ms: number): unknown;
  clearTimer(handle: unknown): void;
  /** Resolves only once every image is fully decoded, not merely fetched. */
  loadImages(urls: string[]): Promise<void>;
}

export interface RunnerUi {
  showScreen(view: ScreenView, onAnswer: (choice: number) => void): void;
  updateCountdown(remainingSeconds: number): void;
  showInterstitial(): void;
  showCompletion(answered: number, total: number): void;
  showError(message: string, willRetry: boolean): void;
}

export interface RunnerOptions {
  /** Blank pause between screens (ms). */
  interstitialMs?: number;
  /** Pause before retrying a failed fetch/submit (ms). */
  retryDelayMs?: number;
}

interface ArmedScreen {
  outcome: Promise<AnswerOutcome>;
  answer(choice: number): void;
  cancelTimers(): void;
  startedAt: number;
}

export class SessionRunner {
  private readonly interstitialMs: number;
  private readonly retryDelayMs: number;
  private answered = 0;

  constructor(
    private readonly api: TrialApi,
    private readonly sessionId: string,
    private readonly ui: RunnerUi,
    private readonly hooks: RunnerHooks,
    options: RunnerOptions = {},
  ) {
    this.interstitialMs = options.interstitialMs ?? 1000;
    this.retryDelayMs = options.retryDelayMs ?? 1500;
  }

  /** Drive the session to completion; resolves with the number answered here. */
  async run(): Promise<{ answered: number }> {
    for (;;) {
      let screen: ScreenDescriptor;
      try {
        screen = await this.api.nextScreen(this.sessionId);
      } catch (err) {
        if (err instanceof SessionFinishedError) {
          this.ui.showCompletion(this.answered, this.answered);
          return { answered: this.answered };
        }
        if (err instanceof NetworkError) {
          this.ui.showError("Connection lost; retrying…", true);
          await this.pause(this.retryDelayMs);
          continue;
        }
        throw err;
      }
      await this.presentAndSubmit(screen);
      this.answered += 1;
      this.ui.showInterstitial();
      await this.pause(this.interstitialMs);
    }
  }

  private async presentAndSubmit(screen: ScreenDescriptor): Promise<void> {
    if (screen.choices.length !== 4) {
      throw new Error(`screen ${screen.screen_index} has ${screen.choices.length} choices, expected 4`);
    }
    const urls = screen.choices.map((c) => this.api.stimulusUrl(c.url)) as ScreenView["urls"];
    // decode first: the timer must not include image loading time
    await this.hooks.loadImages(urls);
    const armed = this.armScreen(screen, urls);
    const outcome = await armed.outcome;
    const elapsed = this.hooks.now() - armed.startedAt;
    armed.cancelTimers();
    await this.submitOnce(screen.screen_index, outcome, elapsed);
  }

  private armScreen(screen: ScreenDescriptor, urls: ScreenView["urls"]): ArmedScreen {
    const limitMs = screen.time_limit_s * 1000;
    let settled = false;
    let settle: (outcome: AnswerOutcome) => void = () => undefined;
    const outcome = new Promise<AnswerOutcome>((resolve) => {
      settle = (value) => {
        if (settled) return; // first event wins: clicks, keys and timeout race
        settled = true;
        resolve(value);
      };
    });

    const timeoutHandle = this.hooks.setTimer(() => settle({ kind: "timeout" }), limitMs);
    const tickHandles: unknown[] = [];
    for (let s = 1; s < screen.time_limit_s; s += 1) {
      tickHandles.push(
        this.hooks.setTimer(() => {
          if (!settled) this.ui.updateCountdown(screen.time_limit_s - s);
        }, s * 1000),
      );
    }

    this.ui.showScreen(
      {
        prompt: screen.prompt,
        urls,
        index: screen.screen_index,
        total: screen.total,
        remainingSeconds: screen.time_limit_s,
      },
      (choice) => settle({ kind: "choice", choice }),
    );
    const startedAt = this.hooks.now();

    return {
      outcome,
      answer: (choice) => settle({ kind: "choice", choice }),
      cancelTimers: () => {
        this.hooks.clearTimer(timeoutHandle);
        tickHandles.forEach((h) => this.hooks.clearTimer(h));
      },
      startedAt,
    };
  }

  private async submitOnce(
    screenIndex: number,
    outcome: AnswerOutcome,
    elapsedMs: number,
  ): Promise<void> {
    const body = {
      screen_index: screenIndex,
      choice: outcome.kind === "choice" ? outcome.choice : null,
      timeout: outcome.kind === "timeout",
      client_elapsed_ms: elapsedMs,
    };
    for (;;) {
      try {
        await this.api.submit(this.sessionId, body);
        return;
      } catch (err) {
        if (err instanceof DuplicateResponseError) {
          return; // an earlier retry already landed; the server kept one record
        }
        if (err instanceof NetworkError) {
          this.ui.showError("Submission failed; retrying…", true);
          await this.pause(this.retryDelayMs);
          continue;
        }
        throw err;
      }
    }
  }

  private pause(ms: number): Promise<void> {
    return new Promise((resolve) => this.hooks.setTimer(resolve, ms));
  }
}

/** Production hooks: monotonic clock, real timers, real image decoding. */
export function browserHooks(): RunnerHooks {
  return {
    now: () => performance.now(),
    setTimer: (fn, ms) => setTimeout(fn, ms),
    clearTimer: (handle) => clearTimeout(handle as number),
    loadImages: async (urls) => {
      await Promise.all(
        urls.map(
          (url) =>
            new Promise<void>((resolve, reject) => {
              const img = new Image();
              img.onerror = () => reject(new Error(`failed to load ${url}`));
              img.src = url;
              if (typeof img.decode === "function") {
                img.decode().then(() => resolve(), reject);
              } else {
                img.onload = () => resolve();
              }
            }),
        ),
      );
    },
  };
}
