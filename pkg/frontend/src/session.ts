// Browser session: the labeler token and service URL, held client-side.
// No vote can be submitted without a token; domain data never lives here.

export interface UiSession {
  serviceBaseUrl: string;
  labelerToken: string;
}

const STORAGE_KEY = "smstriage-session";

export function loadSession(storage: Storage): UiSession | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) {
    return null;
  }
  try {
    const parsed = JSON.parse(raw);
    if (
      typeof parsed?.serviceBaseUrl === "string" &&
      typeof parsed?.labelerToken === "string" &&
      parsed.labelerToken.length > 0
    ) {
      return parsed as UiSession;
    }
  } catch {
    // fall through: corrupted storage behaves like no session
  }
  return null;
}

export function saveSession(storage: Storage, session: UiSession): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(session));
}

export function clearSession(storage: Storage): void {
  storage.removeItem(STORAGE_KEY);
}

export function validateSession(
  serviceBaseUrl: string,
  labelerToken: string,
): UiSession {
  const url = serviceBaseUrl.trim().replace(/\/+$/, "");
  const token = labelerToken.trim();
  if (!/^https?:\/\//.test(url)) {
    throw new Error("service URL must start with http:// or https://");
  }
  if (!token) {
    throw new Error("labeler token must not be empty");
  }
  return { serviceBaseUrl: url, labelerToken: token };
}
