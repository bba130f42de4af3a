// Client-side mirror of the server's sentiment-word rules, used for live
// input feedback. The server stays authoritative.

export const MAX_WORD_CODEPOINTS = 32;

const ALLOWED_CHAR = /^[\p{L}\p{N}-]$/u;

export interface WordCheck {
  ok: boolean;
  normalized: string;
  reason?: string;
}

export function checkWord(raw: string): WordCheck {
  const normalized = raw.trim().toLowerCase();
  if (!normalized) {
    return { ok: false, normalized, reason: 'enter one word' };
  }
  if (/\s/u.test(normalized)) {
    return { ok: false, normalized, reason: 'a single word, no spaces' };
  }
  const codepoints = Array.from(normalized);
  if (codepoints.length > MAX_WORD_CODEPOINTS) {
    return { ok: false, normalized, reason: `at most ${MAX_WORD_CODEPOINTS} characters` };
  }
  for (const ch of codepoints) {
    if (!ALLOWED_CHAR.test(ch)) {
      return { ok: false, normalized, reason: 'letters, digits, or hyphens only' };
    }
  }
  return { ok: true, normalized };
}
