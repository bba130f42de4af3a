// Word-cloud sizing: font size scales linearly with count, ties resolved
// alphabetically. Layout beyond sizing is left to CSS flow.

export interface CloudItem {
  word: string;
  count: number;
  fontPx: number;
}

export const MIN_FONT_PX = 14;
export const MAX_FONT_PX = 48;

export function cloudItems(entries: { word: string; count: number }[]): CloudItem[] {
  const sorted = [...entries].sort((a, b) => b.count - a.count || a.word.localeCompare(b.word));
  const maxCount = sorted.length ? sorted[0].count : 1;
  return sorted.map(({ word, count }) => ({
    word,
    count,
    fontPx: maxCount === 0 ? MIN_FONT_PX : MIN_FONT_PX + ((MAX_FONT_PX - MIN_FONT_PX) * count) / maxCount,
  }));
}
