/**
 * Client-side mirror of the server's command grammar.
 *
 * Validation must agree with the service exactly — same accept/reject
 * decision, same error class, same canonical rendering — so an override
 * can be checked before any request leaves the browser. The shared golden
 * vectors in tests/golden_grammar.json pin that agreement; if this file
 * and the server ever disagree, both test suites fail on the same row.
 */

export type GrammarErrorClass =
  | "UnknownCommandError"
  | "ArityError"
  | "UnknownColorError"
  | "NonNumericArgumentError"
  | "RangeError"
  | "InvalidQueryTokenError";

export type Command =
  | { kind: "search"; query: string[] }
  | { kind: "adjust_color"; color: string; intensity: number }
  | { kind: "adjust_brightness"; value: number }
  | { kind: "adjust_contrast"; value: number }
  | { kind: "rotate"; degrees: number }
  | { kind: "image_cutout" };

export type ParseResult =
  | { ok: true; command: Command; canonical: string }
  | { ok: false; error: GrammarErrorClass; message: string };

export const COLOR_NAMES = [
  "red",
  "orange",
  "green",
  "blue",
  "sky_blue",
  "purple",
  "brown",
  "yellow",
  "pink",
] as const;

const INT_RE = /^-?\d+$/;
const INTENSITY_RE = /^-?\d+(\.\d{1,3})?$/;
const QUERY_TOKEN_RE = /^[a-z0-9]+$/;

/** Surface form of a color name ("sky_blue" -> ["sky", "blue"]). */
export function colorSurfaceTokens(color: string): string[] {
  return color.split("_");
}

// Longest surface form first, so "sky blue" wins over any one-token prefix.
const COLOR_BY_SURFACE: Array<[string[], string]> = COLOR_NAMES.map(
  (c): [string[], string] => [colorSurfaceTokens(c), c],
).sort((a, b) => b[0].length - a[0].length);

function fail(error: GrammarErrorClass, message: string): ParseResult {
  return { ok: false, error, message };
}

function matchColor(tokens: string[]): { color: string; used: number } | null {
  for (const [surface, color] of COLOR_BY_SURFACE) {
    if (
      tokens.length >= surface.length &&
      surface.every((t, i) => tokens[i] === t)
    ) {
      return { color, used: surface.length };
    }
  }
  return null;
}

function parseInt_(
  token: string,
  lo: number,
  hi: number,
  what: string,
): { value: number } | ParseResult {
  if (!INT_RE.test(token)) {
    return fail("NonNumericArgumentError", `${what}: ${token} is not an integer`);
  }
  const value = Number(token); // -0 compares equal to 0, matching the server
  if (!(lo <= value && value <= hi)) {
    return fail("RangeError", `${what} ${value} outside [${lo}, ${hi}]`);
  }
  return { value };
}

/**
 * Minimal decimal with 1..3 fractional digits; preserves every legal input.
 * Negative zero keeps its sign ("-0" parses to -0.0 and renders "-0.0"),
 * matching the server's formatter.
 */
export function formatIntensity(value: number): string {
  let text = Math.abs(value).toFixed(3);
  if (Object.is(value, -0) || value < 0) text = "-" + text;
  while (text.endsWith("0") && !text.endsWith(".0")) {
    text = text.slice(0, -1);
  }
  return text;
}

function intValueToString(value: number): string {
  return Object.is(value, -0) ? "0" : String(value);
}

/** Canonical bracketed rendering of a parsed command. */
export function formatCommand(cmd: Command): string {
  switch (cmd.kind) {
    case "search":
      return `[${["search", ...cmd.query].join(" ")}]`;
    case "adjust_color":
      return `[${[
        "adjust_color",
        ...colorSurfaceTokens(cmd.color),
        formatIntensity(cmd.intensity),
      ].join(" ")}]`;
    case "adjust_brightness":
      return `[adjust_attr brightness ${intValueToString(cmd.value)}]`;
    case "adjust_contrast":
      return `[adjust_attr contrast ${intValueToString(cmd.value)}]`;
    case "rotate":
      return `[rotate ${intValueToString(cmd.degrees)}]`;
    case "image_cutout":
      return "[image_cutout]";
  }
}

/** Parse one bracketed command string; every failure carries its class. */
export function parseCommand(text: string): ParseResult {
  const stripped = text.trim();
  if (!(stripped.startsWith("[") && stripped.endsWith("]")) || stripped.length < 2) {
    return fail("UnknownCommandError", `not a bracketed command: ${text}`);
  }
  const inner = stripped.slice(1, -1);
  if (inner.includes("[") || inner.includes("]")) {
    return fail("UnknownCommandError", `nested brackets: ${text}`);
  }
  const tokens = inner.split(/\s+/).filter((t) => t.length > 0);
  if (tokens.length === 0) {
    return fail("UnknownCommandError", "empty command");
  }
  const [name, ...args] = tokens;

  if (name === "search") {
    if (args.length === 0) {
      return fail("ArityError", "search requires at least one query token");
    }
    for (const tok of args) {
      if (!QUERY_TOKEN_RE.test(tok)) {
        return fail("InvalidQueryTokenError", `bad query token ${tok}`);
      }
    }
    return done({ kind: "search", query: args });
  }

  if (name === "adjust_color") {
    if (args.length === 0) {
      return fail("ArityError", "adjust_color requires a color and an intensity");
    }
    const match = matchColor(args);
    if (match === null) {
      return fail("UnknownColorError", `no color name at ${args.join(" ")}`);
    }
    const rest = args.slice(match.used);
    if (rest.length !== 1) {
      return fail(
        "ArityError",
        `adjust_color takes exactly one intensity, got ${rest.length} extra tokens`,
      );
    }
    const raw = rest[0];
    if (!INTENSITY_RE.test(raw)) {
      return fail("NonNumericArgumentError", `intensity: ${raw} is not a decimal`);
    }
    const intensity = Number(raw);
    if (!(0 <= intensity && intensity <= 1)) {
      return fail("RangeError", `intensity ${intensity} outside [0, 1]`);
    }
    return done({ kind: "adjust_color", color: match.color, intensity });
  }

  if (name === "adjust_attr") {
    if (args.length !== 2) {
      return fail(
        "ArityError",
        `adjust_attr takes an attribute and a value, got ${args.length}`,
      );
    }
    const [attr, raw] = args;
    if (attr === "brightness") {
      const r = parseInt_(raw, -100, 100, "brightness");
      if ("ok" in r) return r;
      return done({ kind: "adjust_brightness", value: r.value });
    }
    if (attr === "contrast") {
      const r = parseInt_(raw, 0, 100, "contrast");
      if ("ok" in r) return r;
      return done({ kind: "adjust_contrast", value: r.value });
    }
    return fail("UnknownCommandError", `unknown adjust_attr attribute ${attr}`);
  }

  if (name === "rotate") {
    if (args.length !== 1) {
      return fail("ArityError", `rotate takes one value, got ${args.length}`);
    }
    const r = parseInt_(args[0], 0, 360, "degrees");
    if ("ok" in r) return r;
    return done({ kind: "rotate", degrees: r.value });
  }

  if (name === "image_cutout") {
    if (args.length !== 0) {
      return fail("ArityError", "image_cutout takes no arguments");
    }
    return done({ kind: "image_cutout" });
  }

  return fail("UnknownCommandError", `unknown command ${name}`);
}

function done(command: Command): ParseResult {
  return { ok: true, command, canonical: formatCommand(command) };
}
