// Exact rationals arrive as "num/den" strings. We never do arithmetic on
// money client-side: values are displayed verbatim, with a decimal hint
// computed only for readability.

export interface DisplayRational {
  exact: string;
  hint: string;
}

const PATTERN = /^(-?\d+)\/(\d+)$/;

export function displayRational(wire: string, digits = 4): DisplayRational {
  const m = PATTERN.exec(wire);
  if (!m) {
    return { exact: wire, hint: "" };
  }
  const num = BigInt(m[1]);
  const den = BigInt(m[2]);
  if (den === 1n) {
    return { exact: wire, hint: num.toString() };
  }
  const scale = 10n ** BigInt(digits);
  const negative = num < 0n;
  const abs = negative ? -num : num;
  const scaled = (abs * scale + den / 2n) / den;
  const whole = scaled / scale;
  const frac = (scaled % scale).toString().padStart(digits, "0").replace(/0+$/, "");
  const body = frac.length ? `${whole}.${frac}` : `${whole}`;
  return { exact: wire, hint: `≈ ${negative ? "-" : ""}${body}` };
}
