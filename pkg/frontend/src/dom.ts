/** Tiny DOM helpers; the studio is framework-free. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export interface SliderOptions {
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
  onCommit: (value: number) => void;
}

export interface Slider {
  root: HTMLElement;
  input: HTMLInputElement;
  error: HTMLElement;
  setValue(v: number): void;
  setError(message: string | null): void;
}

export function slider(opts: SliderOptions): Slider {
  const input = el("input", {
    type: "range",
    min: String(opts.min),
    max: String(opts.max),
    step: String(opts.step),
  });
  input.value = String(opts.value);
  const readout = el("span", { class: "readout" }, [String(opts.value)]);
  const error = el("span", { class: "error" });
  input.addEventListener("input", () => {
    readout.textContent = input.value;
  });
  input.addEventListener("change", () => {
    opts.onCommit(Number(input.value));
  });
  const root = el("label", { class: "slider" }, [opts.label, input, readout, error]);
  return {
    root,
    input,
    error,
    setValue(v: number) {
      input.value = String(v);
      readout.textContent = String(v);
    },
    setError(message: string | null) {
      error.textContent = message ?? "";
    },
  };
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) clearTimeout(handle);
    handle = setTimeout(() => fn(...args), ms);
  };
}
