import type { RunnerUi } from "./runner.js";
import type { ScreenView } from "./types.js";

const KEY_TO_CHOICE: Record<string, number> = { "1": 0, "2": 1, "3": 2, "4": 3 };

/**
 * Plain-DOM view layer. One screen at a time; mouse clicks on the images and
 * the 1–4 keys both answer (the runner keeps only the first event). No
 * correctness feedback is ever rendered during a run.
 */
export class DomUi implements RunnerUi {
  private keyHandler: ((ev: KeyboardEvent) => void) | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly doc: Document = document,
  ) {}

  private clear(): void {
    if (this.keyHandler) {
      this.doc.removeEventListener("keydown", this.keyHandler);
      this.keyHandler = null;
    }
    this.root.innerHTML = "";
  }

  showScreen(view: ScreenView, onAnswer: (choice: number) => void): void {
    this.clear();
    const prompt = this.doc.createElement("h1");
    prompt.className = "prompt";
    prompt.textContent = view.prompt;

    const grid = this.doc.createElement("div");
    grid.className = "choices";
    view.urls.forEach((url, i) => {
      const button = this.doc.createElement("button");
      button.className = "choice";
      button.dataset.choice = String(i);
      const img = this.doc.createElement("img");
      img.src = url;
      img.alt = `choice ${i + 1}`;
      button.append(img);
      button.addEventListener("click", () => onAnswer(i));
      grid.append(button);
    });

    const status = this.doc.createElement("div");
    status.className = "status";
    const progress = this.doc.createElement("span");
    progress.className = "progress";
    progress.textContent = `${view.index + 1} / ${view.total}`;
    const countdown = this.doc.createElement("span");
    countdown.className = "countdown";
    countdown.textContent = `${view.remainingSeconds}`;
    status.append(progress, countdown);

    this.root.append(prompt, grid, status);

    this.keyHandler = (ev) => {
      const choice = KEY_TO_CHOICE[ev.key];
      if (choice !== undefined) onAnswer(choice);
    };
    this.doc.addEventListener("keydown", this.keyHandler);
  }

  updateCountdown(remainingSeconds: number): void {
    const el = this.root.querySelector(".countdown");
    if (el) el.textContent = `${remainingSeconds}`;
  }

  showInterstitial(): void {
    this.clear();
    const blank = this.doc.createElement("div");
    blank.className = "interstitial";
    this.root.append(blank);
  }

  showCompletion(): void {
    this.clear();
    const done = this.doc.createElement("h1");
    done.className = "completion";
    done.textContent = "All done. Thank you!";
    const note = this.doc.createElement("p");
    note.textContent = "You can close this window now.";
    this.root.append(done, note);
  }

  showError(message: string, willRetry: boolean): void {
    let banner = this.root.querySelector(".error-banner");
    if (!banner) {
      banner = this.doc.createElement("div");
      banner.className = "error-banner";
      this.root.prepend(banner);
    }
    banner.textContent = willRetry ? `${message}` : `Error: ${message}`;
  }
}
