/**
 * Studio entry point. Expects the session service URL and either an existing
 * session id (?session=) or a config URL (?config=) to create one.
 */

import { SessionApi } from "./api";
import { el } from "./dom";
import { CoefficientPanel } from "./panels/coefficients";
import { ChannelExplorer } from "./panels/channels";
import { Timeline } from "./panels/timeline";
import { Preview } from "./preview";
import { SessionStore } from "./state";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8321";
  const api = new SessionApi(base);

  let sessionId = params.get("session");
  if (!sessionId) {
    const configUrl = params.get("config");
    if (!configUrl) {
      document.body.append(
        el("p", {}, ["Pass ?session=<id> or ?config=<url> to open a session."]),
      );
      return;
    }
    const config = await (await fetch(configUrl)).json();
    sessionId = (await api.createSession(config)).id;
  }

  const store = new SessionStore(api, sessionId);
  await store.refresh();

  const preview = new Preview(store);
  const coeffs = new CoefficientPanel(store);
  const timeline = new Timeline(store);
  const channels = await ChannelExplorer.create(store);

  document.body.append(
    el("main", { class: "studio" }, [preview.root, coeffs.root, timeline.root, channels.root]),
  );
  store.setFrame(0);
}

void boot();
