/**
 * Text-direction heuristic: the first strong directional character decides,
 * so Arabic-script replies (MSA, Derja) render right-to-left while Romanized
 * Tunizi, French, English and the Nigerian languages stay left-to-right.
 */

const RTL_CHAR =
  /[֐-׿؀-ۿ܀-ݏݐ-ݿࢠ-ࣿיִ-﷿ﹰ-﻿]/;
const LTR_CHAR = /[A-Za-zÀ-ɏͰ-ϿЀ-ӿ]/;

export function hasArabicScript(text: string): boolean {
  return /[؀-ۿݐ-ݿࢠ-ࣿﭐ-﷿ﹰ-﻿]/.test(text);
}

export type Direction = 'ltr' | 'rtl';

export function textDirection(text: string): Direction {
  for (const ch of text) {
    if (RTL_CHAR.test(ch)) return 'rtl';
    if (LTR_CHAR.test(ch)) return 'ltr';
  }
  return 'ltr';
}
