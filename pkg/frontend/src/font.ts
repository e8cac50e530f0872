/** 5x7 bitmap glyphs for axis tick labels (digits, minus, dot, e). */

const GLYPHS: Record<string, string[]> = {
  "0": ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
  "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
  "2": ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
  "3": ["11110", "00001", "00001", "01110", "00001", "00001", "11110"],
  "4": ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
  "5": ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
  "6": ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
  "7": ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
  "8": ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
  "9": ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
  "-": ["00000", "00000", "00000", "11111", "00000", "00000", "00000"],
  ".": ["00000", "00000", "00000", "00000", "00000", "01100", "01100"],
  e: ["00000", "00000", "01110", "10001", "11111", "10000", "01110"],
  "+": ["00000", "00100", "00100", "11111", "00100", "00100", "00000"],
  " ": ["00000", "00000", "00000", "00000", "00000", "00000", "00000"],
};

export const GLYPH_W = 5;
export const GLYPH_H = 7;

export interface Canvas {
  width: number;
  height: number;
  rgb: Uint8Array;
}

export function setPixel(c: Canvas, px: number, py: number,
                         r: number, g: number, b: number): void {
  if (px < 0 || py < 0 || px >= c.width || py >= c.height) return;
  const at = (py * c.width + px) * 3;
  c.rgb[at] = r;
  c.rgb[at + 1] = g;
  c.rgb[at + 2] = b;
}

/** Draw text with its top-left corner at (px, py); 1px letter spacing. */
export function drawText(c: Canvas, px: number, py: number, text: string,
                         r = 0, g = 0, b = 0): void {
  let cx = px;
  for (const ch of text) {
    const glyph = GLYPHS[ch] ?? GLYPHS[" "];
    for (let row = 0; row < GLYPH_H; row++) {
      for (let col = 0; col < GLYPH_W; col++) {
        if (glyph[row][col] === "1") setPixel(c, cx + col, py + row, r, g, b);
      }
    }
    cx += GLYPH_W + 1;
  }
}

export function textWidth(text: string): number {
  return text.length * (GLYPH_W + 1) - 1;
}
