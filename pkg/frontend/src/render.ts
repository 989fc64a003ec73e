/**
 * DOM projection of ViewState. No state lives here: render() rebuilds the
 * view from scratch on every change, so whatever ViewState says is what
 * the page shows — including the invariant that the proposal card exists
 * exactly when the server reports a pending proposal.
 */

import { ViewState, TokenBadge } from "./state.js";

export interface Handlers {
  onSend(text: string): void;
  onAccept(): void;
  onOverride(text: string): void;
  onDraftChange(text: string): void;
  onCompareSelect(index: number | null): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function placeholderOnError(img: HTMLImageElement): void {
  img.addEventListener("error", () => {
    img.classList.add("broken");
    img.alt = "image unavailable";
    img.removeAttribute("src");
  });
}

function weightTooltip(badge: TokenBadge): string {
  const [g, u, c] = badge.weights.map((w) => w.toFixed(3));
  return `generate ${g} · utterance ${u} · concept ${c}`;
}

function renderProposal(state: ViewState, handlers: Handlers): HTMLElement {
  const card = el("section", "proposal-card");
  card.append(el("h2", undefined, "Proposed command"));

  const tokens = el("div", "proposal-tokens");
  for (const badge of state.pending!.tokens) {
    const span = el("span", `token-badge source-${badge.source}`, badge.token);
    span.title = weightTooltip(badge); // the full 3-vector, on hover
    tokens.append(span);
  }
  card.append(tokens);

  if (!state.pending!.valid) {
    card.append(
      el("p", "proposal-invalid", "does not parse — override with a correction"),
    );
  }

  const actions = el("div", "proposal-actions");
  const accept = el("button", "accept", "Accept");
  accept.disabled = state.busy || !state.pending!.valid;
  accept.addEventListener("click", () => handlers.onAccept());

  const overrideInput = el("input", "override-input") as HTMLInputElement;
  overrideInput.value = state.overrideDraft;
  overrideInput.placeholder = state.pending!.commandText;
  overrideInput.addEventListener("input", () => handlers.onDraftChange(overrideInput.value));

  const override = el("button", "override", "Override");
  override.disabled = state.busy;
  override.addEventListener("click", () => handlers.onOverride(overrideInput.value));

  actions.append(accept, overrideInput, override);
  card.append(actions);

  if (state.overrideError) {
    card.append(el("p", "override-error", state.overrideError));
  }
  return card;
}

function renderMessages(state: ViewState): HTMLElement {
  const pane = el("section", "chat-pane");
  for (const message of state.messages) {
    pane.append(el("p", `message role-${message.role}`, message.text));
  }
  return pane;
}

function renderViewer(state: ViewState, handlers: Handlers): HTMLElement {
  const viewer = el("section", "viewer");
  if (state.currentImageUrl) {
    const img = el("img", "current-image") as HTMLImageElement;
    img.src = state.currentImageUrl;
    img.alt = "current image";
    placeholderOnError(img);
    viewer.append(img);
  } else {
    viewer.append(el("div", "current-image placeholder", "no image yet"));
  }

  const strip = el("div", "history-strip");
  for (const item of state.history) {
    const thumb = el("button", "thumb");
    thumb.title = item.command;
    const img = el("img") as HTMLImageElement;
    img.src = item.url;
    img.alt = `image ${item.index}`;
    placeholderOnError(img);
    thumb.append(img, el("span", "thumb-index", String(item.index)));
    thumb.disabled = !state.compareEnabled;
    thumb.addEventListener("click", () => handlers.onCompareSelect(item.index));
    strip.append(thumb);
  }
  viewer.append(strip);

  if (state.compare) {
    const panel = el("div", "compare");
    const left = el("figure", "compare-side");
    if (state.compare.leftUrl) {
      const img = el("img") as HTMLImageElement;
      img.src = state.compare.leftUrl;
      img.alt = `before (image ${state.compare.leftIndex})`;
      placeholderOnError(img);
      left.append(img, el("figcaption", undefined, `before — image ${state.compare.leftIndex}`));
    } else {
      left.append(el("div", "placeholder", "no prior image"));
    }
    const right = el("figure", "compare-side");
    const rimg = el("img") as HTMLImageElement;
    rimg.src = state.compare.rightUrl;
    rimg.alt = `after (image ${state.compare.rightIndex})`;
    placeholderOnError(rimg);
    right.append(
      rimg,
      el("figcaption", undefined, `after — image ${state.compare.rightIndex}`),
    );
    const caption = el("p", "compare-command", state.compare.command);
    const close = el("button", "compare-close", "close");
    close.addEventListener("click", () => handlers.onCompareSelect(null));
    panel.append(left, right, caption, close);
    viewer.append(panel);
  }
  return viewer;
}

function renderComposer(state: ViewState, handlers: Handlers): HTMLElement {
  const composer = el("form", "composer") as HTMLFormElement;
  const input = el("input", "utterance-input") as HTMLInputElement;
  input.placeholder = state.pending
    ? "resolve the proposal first"
    : "describe what you want";
  input.disabled = state.busy || state.pending !== null;
  const send = el("button", "send", "Send");
  send.disabled = state.busy || state.pending !== null;
  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim()) handlers.onSend(input.value);
  });
  composer.append(input, send);
  return composer;
}

export function render(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  root.replaceChildren();
  const layout = el("main", state.busy ? "layout busy" : "layout");
  const chat = el("div", "chat-column");
  chat.append(renderMessages(state));
  if (state.pending) {
    chat.append(renderProposal(state, handlers));
  }
  chat.append(renderComposer(state, handlers));
  layout.append(chat, renderViewer(state, handlers));
  root.append(layout);
}
