/** Preview pane: shows the latest applied render as a blob-backed <img>. */

import { el } from "./dom";
import { SessionStore } from "./state";

export class Preview {
  root: HTMLElement;
  img: HTMLImageElement;
  private url: string | null = null;

  constructor(store: SessionStore) {
    this.img = el("img", { class: "preview", alt: "frame preview" });
    this.root = el("section", { class: "preview-pane" }, [this.img]);
    store.subscribe(() => {
      if (!store.previewBytes) return;
      if (typeof URL.createObjectURL !== "function") return; // headless tests
      if (this.url) URL.revokeObjectURL(this.url);
      const buffer = store.previewBytes.slice().buffer as ArrayBuffer;
      this.url = URL.createObjectURL(new Blob([buffer], { type: "image/png" }));
      this.img.src = this.url;
    });
  }
}
