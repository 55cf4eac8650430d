/** Command history persisted per session id in browser storage, so a
 * reconnect to the same session restores the typed history. */

export interface HistoryEntry {
  text: string;
  /** accepted | rejected:<error> | outcome:<trial outcome> */
  status: string;
  at: number; // epoch ms
}

const PREFIX = "dash-studio/history/";

function storage(): Storage | null {
  try {
    return typeof localStorage !== "undefined" ? localStorage : null;
  } catch {
    return null;
  }
}

export function loadHistory(sessionId: string): HistoryEntry[] {
  const s = storage();
  if (!s) return [];
  try {
    const raw = s.getItem(PREFIX + sessionId);
    return raw ? (JSON.parse(raw) as HistoryEntry[]) : [];
  } catch {
    return [];
  }
}

export function saveHistory(sessionId: string, entries: HistoryEntry[]): void {
  const s = storage();
  if (!s) return;
  try {
    s.setItem(PREFIX + sessionId, JSON.stringify(entries.slice(-100)));
  } catch {
    // storage full or unavailable: history is a convenience only
  }
}
