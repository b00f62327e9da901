/**
 * Bit codec shared with the environment: 8 bits per ASCII character,
 * most significant bit first. Must agree bit-for-bit with the server's
 * codec (see the shared codec_vectors.txt file).
 */

export type TerminatedBy = 'period' | 'bit_cap';

export interface LearnerAnswer {
  rawBitsConsumed: number;
  decodedText: string;
  terminatedBy: TerminatedBy;
  droppedBits: number;
}

export function encodeMessage(text: string): string {
  let out = '';
  for (const ch of text) {
    const code = ch.codePointAt(0)!;
    if (code > 0x7f) {
      throw new Error(`cannot encode non-ASCII character ${JSON.stringify(ch)}`);
    }
    out += code.toString(2).padStart(8, '0');
  }
  return out;
}

export function decodeBits(bits: string): string {
  if (bits.length % 8 !== 0 || /[^01]/.test(bits)) {
    throw new Error('bit string must be 0/1 characters in whole bytes');
  }
  let out = '';
  for (let i = 0; i < bits.length; i += 8) {
    out += String.fromCharCode(parseInt(bits.slice(i, i + 8), 2));
  }
  return out;
}

/** Scan a learner bit stream for `periods` period bytes, capped at the bit limit. */
export function decodeAnswer(
  bits: string,
  maxAnswerBits?: number,
  periods = 1,
): LearnerAnswer {
  const usable = maxAnswerBits === undefined ? bits : bits.slice(0, maxAnswerBits);
  let decoded = '';
  let consumed = 0;
  let seen = 0;
  for (let i = 0; i + 8 <= usable.length; i += 8) {
    const ch = String.fromCharCode(parseInt(usable.slice(i, i + 8), 2));
    decoded += ch;
    consumed = i + 8;
    if (ch === '.') {
      seen += 1;
      if (seen >= periods) {
        return {
          rawBitsConsumed: consumed,
          decodedText: decoded,
          terminatedBy: 'period',
          droppedBits: 0,
        };
      }
    }
  }
  return {
    rawBitsConsumed: usable.length,
    decodedText: decoded,
    terminatedBy: 'bit_cap',
    droppedBits: usable.length - consumed,
  };
}
