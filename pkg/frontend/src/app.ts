/** DOM wiring for the portal UI: feed list, subscribe form, session panes.
 * Every interaction round-trips through the portal API; the DOM is rendered
 * from the server's answers only. */

import { PortalClient, PortalError, type FeedSummary } from "./api.js";
import { applyInputResponse, decideDispatch, type SessionPane } from "./model.js";

export interface AppController {
  loadFeeds(): Promise<void>;
  subscribe(url: string, username?: string, password?: string): Promise<void>;
  startSession(feedId: string): Promise<string>;
  submitUtterance(sessionId: string, text: string): Promise<void>;
  selectItem(sessionId: string, index: number): Promise<void>;
  jumpHistory(sessionId: string, phrase: string): Promise<void>;
  pane(sessionId: string): SessionPane | undefined;
  whenIdle(): Promise<void>;
}

export function createApp(root: HTMLElement, client: PortalClient): AppController {
  const doc = root.ownerDocument;
  const panes = new Map<string, SessionPane>();
  const inflight = new Set<Promise<unknown>>();

  root.innerHTML = `
    <h1>voxfeed</h1>
    <section data-testid="feeds-section">
      <h2>Feeds</h2>
      <p data-testid="banner" class="banner" hidden></p>
      <ul data-testid="feed-list" class="feed-list"></ul>
      <form data-testid="subscribe-form" class="subscribe-form">
        <input name="url" placeholder="Feed URL" required />
        <input name="username" placeholder="Username (optional)" />
        <input name="password" type="password" placeholder="Password (optional)" />
        <button type="submit">Subscribe</button>
      </form>
    </section>
    <section data-testid="sessions-section" class="sessions"></section>
  `;

  const banner = root.querySelector<HTMLParagraphElement>('[data-testid="banner"]')!;
  const feedList = root.querySelector<HTMLUListElement>('[data-testid="feed-list"]')!;
  const subscribeForm = root.querySelector<HTMLFormElement>('[data-testid="subscribe-form"]')!;
  const sessionsSection = root.querySelector<HTMLElement>('[data-testid="sessions-section"]')!;

  function track<T>(work: Promise<T>): Promise<T> {
    inflight.add(work);
    work.finally(() => inflight.delete(work)).catch(() => undefined);
    return work;
  }

  async function whenIdle(): Promise<void> {
    while (inflight.size > 0) {
      await Promise.allSettled([...inflight]);
    }
  }

  function showBanner(message: string | null): void {
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  function renderFeeds(feeds: FeedSummary[]): void {
    feedList.innerHTML = "";
    for (const feed of feeds) {
      const row = doc.createElement("li");
      row.dataset.testid = `feed-${feed.feed_id}`;

      const label = doc.createElement("span");
      label.textContent = feed.title ?? feed.url;
      row.append(label);

      if (feed.last_error) {
        const error = doc.createElement("span");
        error.className = "feed-error";
        error.dataset.testid = "feed-error";
        error.textContent = ` unavailable: ${feed.last_error}`;
        row.append(error);
      } else {
        const start = doc.createElement("button");
        start.type = "button";
        start.dataset.testid = `start-${feed.feed_id}`;
        start.textContent = "Start session";
        start.addEventListener("click", () => {
          track(startSession(feed.feed_id)).catch((err) => showBanner(describe(err)));
        });
        row.append(start);
      }
      feedList.append(row);
    }
  }

  function paneElement(sessionId: string): HTMLElement | null {
    return sessionsSection.querySelector(`[data-session="${sessionId}"]`);
  }

  function renderPane(pane: SessionPane): void {
    let host = paneElement(pane.sessionId);
    if (!host) {
      host = doc.createElement("article");
      host.className = "pane";
      host.dataset.session = pane.sessionId;
      host.innerHTML = `
        <p class="prompt" data-testid="prompt"></p>
        <ol class="items" data-testid="items"></ol>
        <form data-testid="utterance-form" class="utterance-form">
          <input name="utterance" data-testid="utterance" placeholder="Say something..." autocomplete="off" />
          <button type="submit" data-testid="say">Say</button>
        </form>
        <p class="notice" data-testid="notice" hidden></p>
        <div class="meta">
          <span data-testid="turns"></span>
          <ul class="ranked" data-testid="ranked"></ul>
          <div class="history" data-testid="history"></div>
        </div>
      `;
      sessionsSection.append(host);

      const form = host.querySelector<HTMLFormElement>('[data-testid="utterance-form"]')!;
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        const input = form.querySelector<HTMLInputElement>('[data-testid="utterance"]')!;
        const text = input.value;
        if (!text.trim()) return;
        input.value = "";
        track(submitUtterance(pane.sessionId, text)).catch((err) => showBanner(describe(err)));
      });
    }

    host.querySelector('[data-testid="prompt"]')!.textContent = pane.prompt;
    host.querySelector('[data-testid="turns"]')!.textContent = `turns: ${pane.turnCount}`;

    const notice = host.querySelector<HTMLParagraphElement>('[data-testid="notice"]')!;
    notice.hidden = pane.notice === null;
    notice.textContent = pane.notice ?? "";

    const list = host.querySelector<HTMLOListElement>('[data-testid="items"]')!;
    list.innerHTML = "";
    for (const item of pane.items) {
      const row = doc.createElement("li");
      row.dataset.testid = `item-${item.index}`;
      row.classList.toggle("highlighted", pane.highlighted === item.index);
      const button = doc.createElement("button");
      button.type = "button";
      button.textContent = item.title;
      button.addEventListener("click", () => {
        track(selectItem(pane.sessionId, item.index)).catch((err) => showBanner(describe(err)));
      });
      row.append(button);
      list.append(row);
    }

    const ranked = host.querySelector<HTMLUListElement>('[data-testid="ranked"]')!;
    ranked.innerHTML = "";
    for (const entry of pane.ranked) {
      const row = doc.createElement("li");
      row.textContent = `item ${entry.item}: ${entry.score.toFixed(3)}`;
      ranked.append(row);
    }

    const history = host.querySelector<HTMLElement>('[data-testid="history"]')!;
    history.innerHTML = "";
    for (const phrase of Object.keys(pane.historyShortcuts)) {
      const button = doc.createElement("button");
      button.type = "button";
      button.dataset.testid = `history-${phrase.replaceAll(" ", "-")}`;
      button.textContent = phrase;
      button.addEventListener("click", () => {
        track(jumpHistory(pane.sessionId, phrase)).catch((err) => showBanner(describe(err)));
      });
      history.append(button);
    }

    const say = host.querySelector<HTMLButtonElement>('[data-testid="say"]')!;
    say.disabled = false;
  }

  function setBusy(sessionId: string, busy: boolean): void {
    const host = paneElement(sessionId);
    if (!host) return;
    const input = host.querySelector<HTMLInputElement>('[data-testid="utterance"]');
    const say = host.querySelector<HTMLButtonElement>('[data-testid="say"]');
    if (input) input.disabled = busy;
    if (say) say.disabled = busy;
  }

  async function refreshShortcuts(pane: SessionPane): Promise<SessionPane> {
    const view = await client.getSession(pane.sessionId);
    return { ...pane, historyShortcuts: view.history_shortcuts };
  }

  async function loadFeeds(): Promise<void> {
    try {
      renderFeeds(await client.listFeeds());
      showBanner(null);
    } catch (err) {
      showBanner(describe(err));
    }
  }

  async function subscribe(url: string, username?: string, password?: string): Promise<void> {
    await client.subscribe(url, username, password);
    await loadFeeds();
  }

  async function startSession(feedId: string): Promise<string> {
    const created = await client.createSession(feedId);
    const view = await client.getSession(created.session_id);
    const pane: SessionPane = {
      sessionId: created.session_id,
      feedId,
      nodeId: view.node_id,
      prompt: view.prompt,
      turnCount: view.turn_count,
      items: view.items,
      highlighted: null,
      ranked: [],
      historyShortcuts: view.history_shortcuts,
      notice: null,
    };
    panes.set(pane.sessionId, pane);
    renderPane(pane);
    return pane.sessionId;
  }

  async function dispatch(sessionId: string, kind: "phrase" | "shortcut", value: string): Promise<void> {
    const pane = panes.get(sessionId);
    if (!pane) throw new Error(`no pane for session ${sessionId}`);
    setBusy(sessionId, true);
    try {
      const response = await client.postInput(sessionId, kind, value);
      let updated = applyInputResponse(pane, response);
      updated = await refreshShortcuts(updated);
      panes.set(sessionId, updated);
      renderPane(updated);
    } finally {
      setBusy(sessionId, false);
    }
  }

  async function submitUtterance(sessionId: string, text: string): Promise<void> {
    const pane = panes.get(sessionId);
    if (!pane) throw new Error(`no pane for session ${sessionId}`);
    const { kind, value } = decideDispatch(text, pane.items, pane.historyShortcuts);
    await dispatch(sessionId, kind, value);
  }

  function selectItem(sessionId: string, index: number): Promise<void> {
    // The graphical channel posts the same PhraseMatch the voice channel would.
    return dispatch(sessionId, "phrase", String(index));
  }

  function jumpHistory(sessionId: string, phrase: string): Promise<void> {
    return dispatch(sessionId, "phrase", phrase);
  }

  subscribeForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(subscribeForm);
    const url = String(data.get("url") ?? "").trim();
    if (!url) return;
    track(subscribe(
      url,
      String(data.get("username") ?? "") || undefined,
      String(data.get("password") ?? "") || undefined,
    )).catch((err) => showBanner(describe(err)));
  });

  return {
    loadFeeds: () => track(loadFeeds()),
    subscribe: (url, username, password) => track(subscribe(url, username, password)),
    startSession: (feedId) => track(startSession(feedId)),
    submitUtterance: (sessionId, text) => track(submitUtterance(sessionId, text)),
    selectItem: (sessionId, index) => track(selectItem(sessionId, index)),
    jumpHistory: (sessionId, phrase) => track(jumpHistory(sessionId, phrase)),
    pane: (sessionId) => panes.get(sessionId),
    whenIdle,
  };
}

function describe(err: unknown): string {
  if (err instanceof PortalError) return `portal error ${err.status}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
