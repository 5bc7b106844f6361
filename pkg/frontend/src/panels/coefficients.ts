/**
 * Coefficient panel: sliders for the four blend coefficients plus source
 * selectors, pre-filled with the defaults and a reset button. Each commit
 * issues one debounced PATCH; the preview refreshes after the ack.
 */

import { Coefficients, DEFAULT_COEFFICIENTS } from "../api";
import { debounce, el, slider, Slider } from "../dom";
import { SessionStore } from "../state";

const SLIDER_SPECS: { key: keyof Coefficients; min: number; max: number; step: number }[] = [
  { key: "alpha", min: -3, max: 3, step: 0.05 },
  { key: "beta", min: -3, max: 3, step: 0.05 },
  { key: "gamma", min: -3, max: 3, step: 0.05 },
  { key: "zeta", min: 0, max: 1, step: 0.05 },
];

const SOURCE_KEYS = ["rigid_source", "pose_source", "local_source"] as const;

export class CoefficientPanel {
  root: HTMLElement;
  sliders = new Map<string, Slider>();
  selects = new Map<string, HTMLSelectElement>();

  private commit: (patch: Partial<Coefficients>) => void;

  constructor(private store: SessionStore, debounceMs = 150) {
    this.commit = debounce((patch: Partial<Coefficients>) => {
      void this.store.patchCoefficients(patch).then((ok) => {
        if (!ok) this.showError();
      });
    }, debounceMs);

    const rows: HTMLElement[] = [];
    for (const spec of SLIDER_SPECS) {
      const s = slider({
        label: spec.key,
        min: spec.min,
        max: spec.max,
        step: spec.step,
        value: Number(DEFAULT_COEFFICIENTS[spec.key]),
        onCommit: (value) => this.commit({ [spec.key]: value }),
      });
      this.sliders.set(spec.key, s);
      rows.push(s.root);
    }
    for (const key of SOURCE_KEYS) {
      const select = el("select", { "data-key": key });
      for (const option of ["driving", "codriving", "none"]) {
        select.append(el("option", { value: option }, [option]));
      }
      select.value = DEFAULT_COEFFICIENTS[key];
      select.addEventListener("change", () => this.commit({ [key]: select.value }));
      this.selects.set(key, select);
      rows.push(el("label", { class: "source" }, [key, select]));
    }
    const reset = el("button", { class: "reset" }, ["Reset defaults"]);
    reset.addEventListener("click", () => this.reset());
    rows.push(reset);
    this.root = el("section", { class: "coefficients" }, rows);

    store.subscribe(() => this.sync());
  }

  /** Push the defaults as one PATCH (not debounced; reset is deliberate). */
  reset(): void {
    void this.store.patchCoefficients({ ...DEFAULT_COEFFICIENTS });
  }

  private sync(): void {
    if (!this.store.state) return;
    const c = this.store.state.coefficients;
    for (const spec of SLIDER_SPECS) {
      this.sliders.get(spec.key)?.setValue(Number(c[spec.key]));
    }
    for (const key of SOURCE_KEYS) {
      const select = this.selects.get(key);
      if (select) select.value = c[key];
    }
    this.showError();
  }

  private showError(): void {
    const err = this.store.lastError;
    for (const [key, s] of this.sliders) {
      s.setError(err && err.field === key ? err.message : null);
    }
  }
}
