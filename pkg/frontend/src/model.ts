/** Pure view-model logic: how typed text becomes a dialog input and how
 * responses update the pane. No DOM, no network — the portal decides every
 * transition; this module only mirrors its answers. */

import type { InputResponse, ItemView, RankedEntry } from "./api.js";

export interface SessionPane {
  sessionId: string;
  feedId: string;
  nodeId: string;
  prompt: string;
  turnCount: number;
  items: ItemView[];
  highlighted: number | null;
  ranked: RankedEntry[];
  historyShortcuts: Record<string, number[]>;
  notice: string | null;
}

export interface Dispatch {
  kind: "phrase" | "shortcut";
  value: string;
}

/** Exact (case-insensitive) grammar phrase -> phrase input with the item tag;
 * a known history phrase -> phrase input; anything else -> shortcut words. */
export function decideDispatch(
  text: string,
  items: ItemView[],
  historyShortcuts: Record<string, number[]>,
): Dispatch {
  const folded = text.trim().toLowerCase();
  for (const item of items) {
    if (item.phrase.toLowerCase() === folded) {
      return { kind: "phrase", value: String(item.index) };
    }
  }
  for (const phrase of Object.keys(historyShortcuts)) {
    if (phrase.toLowerCase() === folded) {
      return { kind: "phrase", value: phrase };
    }
  }
  return { kind: "shortcut", value: text.trim() };
}

/** The item a node id points at: "n0.3" and "n0.3.1" -> 3, the root -> null. */
export function itemIndexForNode(nodeId: string): number | null {
  const match = /^n0\.(\d+)/.exec(nodeId);
  return match ? Number(match[1]) : null;
}

function noticeFor(response: InputResponse): string | null {
  switch (response.action.type) {
    case "reject":
      return response.action.reason === "nomatch" ? "no match" : `rejected: ${response.action.reason}`;
    case "announce_link":
      return `link: ${response.action.url}`;
    case "enter_feed":
      return `enter feed: ${response.action.url}`;
    default:
      return null;
  }
}

/** Fold a portal response into the pane. Rejections keep the highlight
 * exactly where it was; everything else highlights the node's item. */
export function applyInputResponse(pane: SessionPane, response: InputResponse): SessionPane {
  const rejected = response.action.type === "reject";
  return {
    ...pane,
    nodeId: response.node_id,
    prompt: response.prompt,
    turnCount: response.turn_count,
    ranked: response.ranked,
    highlighted: rejected ? pane.highlighted : itemIndexForNode(response.node_id),
    notice: noticeFor(response),
  };
}
