/**
 * Channel explorer: mined channels grouped by semantic part, sorted by
 * foreground IOU, each with an override slider and a clear control.
 *
 * Slider ranges default to the blended value +- 3x the channel's standard
 * deviation across sampled driving frames (floored so flat channels stay
 * draggable).
 */

import { Catalog, CatalogEntry } from "../api";
import { el, slider, Slider } from "../dom";
import { SessionStore } from "../state";

const SAMPLE_FRAMES = 8;
const MIN_HALF_RANGE = 0.5;

export interface ChannelRow {
  entry: CatalogEntry;
  slider: Slider;
  clear: HTMLButtonElement;
}

export class ChannelExplorer {
  root: HTMLElement;
  groups = new Map<string, CatalogEntry[]>();
  rows: ChannelRow[] = [];

  private constructor(private store: SessionStore, catalog: Catalog,
                      stats: Map<string, { mean: number; std: number }>) {
    for (const entry of catalog.entries) {
      const list = this.groups.get(entry.part) ?? [];
      list.push(entry);
      this.groups.set(entry.part, list);
    }
    for (const list of this.groups.values()) {
      list.sort((a, b) => b.iou_fg - a.iou_fg);
    }

    const sections: HTMLElement[] = [];
    for (const [part, entries] of this.groups) {
      const items: HTMLElement[] = [];
      for (const entry of entries) {
        const key = `${entry.layer}:${entry.channel}`;
        const stat = stats.get(key) ?? { mean: 0, std: 0 };
        const half = Math.max(3 * stat.std, MIN_HALF_RANGE);
        const s = slider({
          label: `L${entry.layer}/C${entry.channel} (iou ${entry.iou_fg.toFixed(2)})`,
          min: stat.mean - half,
          max: stat.mean + half,
          step: half / 100,
          value: stat.mean,
          onCommit: (value) => {
            void this.store.setOverride(entry.layer, entry.channel, value);
          },
        });
        const clear = el("button", { class: "clear" }, ["clear"]) as HTMLButtonElement;
        clear.addEventListener("click", () => {
          void this.store.setOverride(entry.layer, entry.channel, null);
          s.setValue(stat.mean);
        });
        this.rows.push({ entry, slider: s, clear });
        items.push(el("div", { class: "channel" }, [s.root, clear]));
      }
      sections.push(el("section", { class: `part part-${part}` },
                       [el("h3", {}, [part]), ...items]));
    }
    this.root = el("section", { class: "channels" }, sections);
  }

  /** Fetch the catalog and per-channel statistics, then build the panel. */
  static async create(store: SessionStore): Promise<ChannelExplorer> {
    const catalog = await store.api.getChannels(store.sessionId);
    const stats = await ChannelExplorer.channelStats(store, catalog);
    return new ChannelExplorer(store, catalog, stats);
  }

  static async channelStats(
    store: SessionStore,
    catalog: Catalog,
  ): Promise<Map<string, { mean: number; std: number }>> {
    const frameCount = store.state?.frame_count ?? 1;
    const picks = Math.min(SAMPLE_FRAMES, frameCount);
    const samples = new Map<string, number[]>();
    for (let k = 0; k < picks; k++) {
      const j = Math.floor((k * frameCount) / picks);
      const latents = await store.api.getLatents(store.sessionId, j);
      for (const item of latents.catalog) {
        const key = `${item.layer}:${item.channel}`;
        const list = samples.get(key) ?? [];
        list.push(item.value);
        samples.set(key, list);
      }
    }
    const stats = new Map<string, { mean: number; std: number }>();
    for (const [key, values] of samples) {
      const mean = values.reduce((a, b) => a + b, 0) / values.length;
      const variance =
        values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / Math.max(values.length - 1, 1);
      stats.set(key, { mean, std: Math.sqrt(variance) });
    }
    return stats;
  }
}
