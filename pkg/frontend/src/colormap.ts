/**
 * Colormaps: a dark-to-bright perceptual ramp for nonnegative densities and
 * a blue-white-red diverging map (symmetric about zero) for signed ones.
 */

export type Rgb = [number, number, number];

const POSITIVE_ANCHORS: Array<[number, Rgb]> = [
  [0.0, [0, 0, 4]],
  [0.25, [87, 16, 110]],
  [0.5, [188, 55, 84]],
  [0.75, [249, 142, 9]],
  [1.0, [252, 255, 164]],
];

const SIGNED_ANCHORS: Array<[number, Rgb]> = [
  [0.0, [5, 48, 97]],       // deep blue at the most negative value
  [0.5, [247, 247, 247]],   // white at zero
  [1.0, [103, 0, 31]],      // deep red at the most positive value
];

function lerpAnchors(anchors: Array<[number, Rgb]>, s: number): Rgb {
  const clamped = Math.min(1, Math.max(0, s));
  for (let i = 1; i < anchors.length; i++) {
    const [s1, c1] = anchors[i];
    if (clamped <= s1) {
      const [s0, c0] = anchors[i - 1];
      const f = s1 === s0 ? 0 : (clamped - s0) / (s1 - s0);
      return [
        Math.round(c0[0] + f * (c1[0] - c0[0])),
        Math.round(c0[1] + f * (c1[1] - c0[1])),
        Math.round(c0[2] + f * (c1[2] - c0[2])),
      ];
    }
  }
  return anchors[anchors.length - 1][1];
}

/** value in [0, max] -> ramp colour (negative display residue clamps to 0). */
export function positiveColor(value: number, max: number): Rgb {
  return lerpAnchors(POSITIVE_ANCHORS, max > 0 ? value / max : 0);
}

/** value in [-limit, +limit] -> diverging colour, white at zero. */
export function signedColor(value: number, limit: number): Rgb {
  const s = limit > 0 ? 0.5 + 0.5 * (value / limit) : 0.5;
  return lerpAnchors(SIGNED_ANCHORS, s);
}
