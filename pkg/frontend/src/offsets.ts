// The protocol addresses text by UTF-8 byte offset; the editor addresses it
// by UTF-16 code unit.  Every number that crosses the wire goes through one
// of these converters.

const encoder = new TextEncoder();

export function byteLength(text: string): number {
  return encoder.encode(text).length;
}

/** Byte offset of the code unit at `pos` (ASCII fast path skips encoding). */
export function charToByte(text: string, pos: number): number {
  if (pos <= 0) return 0;
  const head = text.slice(0, pos);
  // eslint-disable-next-line no-control-regex
  if (!/[^\x00-\x7f]/.test(head)) return head.length;
  return encoder.encode(head).length;
}

/** Code-unit offset for a byte offset; throws on split code points. */
export function byteToChar(text: string, byte: number): number {
  if (byte <= 0) return 0;
  let bytes = 0;
  let units = 0;
  for (const ch of text) {
    if (bytes === byte) return units;
    bytes += ch.length === 2 ? 4 : utf8Width(ch.codePointAt(0)!);
    units += ch.length;
    if (bytes > byte) {
      throw new RangeError(`byte offset ${byte} splits a code point`);
    }
  }
  if (bytes === byte) return units;
  throw new RangeError(`byte offset ${byte} is past the end (${bytes})`);
}

function utf8Width(cp: number): number {
  if (cp < 0x80) return 1;
  if (cp < 0x800) return 2;
  return 3; // astral code points are handled via ch.length === 2 above
}

export interface WireChange {
  from: number;
  to: number;
  insert?: string;
}

/**
 * Wire form of one editor transaction.
 *
 * The editor reports simultaneous ranges against the old document; the
 * engine applies changes sequentially, each against the previous result.
 * Walking the ranges in order and carrying the byte delta converts one
 * convention to the other.
 */
export function toWireChanges(
  oldText: string,
  ranges: readonly { fromA: number; toA: number; inserted: string }[],
): WireChange[] {
  const out: WireChange[] = [];
  let delta = 0;
  for (const r of ranges) {
    const from = charToByte(oldText, r.fromA) + delta;
    const span = charToByte(oldText, r.toA) - charToByte(oldText, r.fromA);
    const change: WireChange = { from, to: from + span };
    if (r.inserted.length > 0) change.insert = r.inserted;
    out.push(change);
    delta += byteLength(r.inserted) - span;
  }
  return out;
}

/** Smallest single replacement turning `before` into `after` (code units). */
export function diffStrings(
  before: string,
  after: string,
): { from: number; to: number; insert: string } | null {
  if (before === after) return null;
  let start = 0;
  const max = Math.min(before.length, after.length);
  while (start < max && before[start] === after[start]) start++;
  let endB = before.length;
  let endA = after.length;
  while (endB > start && endA > start && before[endB - 1] === after[endA - 1]) {
    endB--;
    endA--;
  }
  return { from: start, to: endB, insert: after.slice(start, endA) };
}
