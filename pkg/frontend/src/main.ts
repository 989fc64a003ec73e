/**
 * Bootstrap: one session per tab. The service origin defaults to the page's
 * own origin (the service mounts this client under /ui), overridable with
 * ?service=http://host:port for development against a separate server.
 */

import { ApiClient } from "./api.js";
import { render, Handlers } from "./render.js";
import { SessionController } from "./state.js";

function serviceBase(): string {
  const override = new URLSearchParams(window.location.search).get("service");
  return (override ?? window.location.origin).replace(/\/$/, "");
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  const api = new ApiClient(serviceBase());
  const controller = new SessionController(api);

  const handlers: Handlers = {
    onSend: (text) => void controller.sendUtterance(text),
    onAccept: () => void controller.accept(),
    onOverride: (text) => void controller.override(text),
    onDraftChange: (text) => controller.setOverrideDraft(text),
    onCompareSelect: (index) => controller.setCompareIndex(index),
  };

  controller.onChange((state) => render(root, state, handlers));

  const existing = new URLSearchParams(window.location.search).get("session");
  await controller.start(existing ?? undefined);
  if (!existing) {
    const url = new URL(window.location.href);
    url.searchParams.set("session", controller.state.sessionId ?? "");
    window.history.replaceState(null, "", url); // refresh re-attaches to the session
  }
}

void boot();
