/**
 * Timeline: frame scrubber plus the export dialog. Scrubbing sets the frame
 * index through the store (which coalesces renders and discards stale
 * responses); export posts a range job and polls until it settles.
 */

import { JobState } from "../api";
import { el } from "../dom";
import { SessionStore } from "../state";

export class Timeline {
  root: HTMLElement;
  scrubber: HTMLInputElement;
  counter: HTMLElement;
  exportButton: HTMLButtonElement;
  jobStatus: HTMLElement;
  lastJob: JobState | null = null;

  constructor(private store: SessionStore, private pollMs = 50) {
    const frameCount = store.state?.frame_count ?? 1;
    this.scrubber = el("input", {
      type: "range",
      min: "0",
      max: String(frameCount - 1),
      step: "1",
      class: "scrubber",
    });
    this.scrubber.value = "0";
    this.counter = el("span", { class: "counter" }, [`frame 0 / ${frameCount - 1}`]);
    this.scrubber.addEventListener("input", () => {
      this.seek(Number(this.scrubber.value));
    });
    this.exportButton = el("button", { class: "export" }, ["Export"]) as HTMLButtonElement;
    this.jobStatus = el("span", { class: "job-status" });
    this.exportButton.addEventListener("click", () => {
      void this.exportRange(0, frameCount);
    });
    this.root = el("section", { class: "timeline" }, [
      this.scrubber,
      this.counter,
      this.exportButton,
      this.jobStatus,
    ]);
    store.subscribe(() => {
      this.counter.textContent = `frame ${store.frameIndex} / ${frameCount - 1}`;
    });
  }

  seek(index: number): void {
    this.store.setFrame(index);
  }

  async exportRange(start: number, stop: number): Promise<JobState> {
    this.jobStatus.textContent = "exporting…";
    const { job } = await this.store.api.startExport(this.store.sessionId, start, stop);
    let state = await this.store.api.getJob(job);
    while (state.status === "running") {
      await new Promise((resolve) => setTimeout(resolve, this.pollMs));
      state = await this.store.api.getJob(job);
    }
    this.lastJob = state;
    if (state.status === "done") {
      this.jobStatus.textContent = "";
      const link = el("a", { href: state.result_path ?? "#", class: "job-link" }, [
        `export ready (${state.frame_count} frames)`,
      ]);
      this.jobStatus.append(link);
    } else {
      this.jobStatus.textContent = `export failed: ${state.error ?? "unknown"}`;
    }
    return state;
  }
}
