/**
 * Learner-side session client for the commai-mini wire protocol.
 *
 * One TCP connection is one session. Frames are newline-delimited:
 * `M <payload>` and `R <0|1>` from the environment, `A <payload>` and
 * `BYE` from the learner. The session's mode and answer-bit limit come
 * from the server's HELLO frame, never from assumptions.
 */

import net from 'node:net';
import { decodeBits, encodeMessage } from './codec.js';

const PROTOCOL_ID = 'commai-mini v1';

export class HandshakeMismatchError extends Error {}

export interface ConnectOptions {
  host: string;
  port: number;
  timeoutMs?: number;
}

export interface Handshake {
  mode: 'bit' | 'byte';
  maxAnswerBits: number;
}

export interface Frame {
  kind: string;
  payload: string;
}

/** prompt text in, answer text out (period optional; the SDK appends it) */
export type AnswerFn = (prompt: string) => string;

export interface RunOptions {
  /** stop (politely) after this many episodes; default: run until disconnect */
  episodes?: number;
  onMessage?: (text: string, role: 'prompt' | 'feedback') => void;
  onReward?: (reward: number) => void;
}

class LineReader {
  private buffer = '';
  private queue: string[] = [];
  private waiters: Array<(line: string | null) => void> = [];
  private ended = false;

  push(chunk: string): void {
    this.buffer += chunk;
    let idx: number;
    while ((idx = this.buffer.indexOf('\n')) >= 0) {
      const line = this.buffer.slice(0, idx).replace(/\r$/, '');
      this.buffer = this.buffer.slice(idx + 1);
      const waiter = this.waiters.shift();
      if (waiter) waiter(line);
      else this.queue.push(line);
    }
  }

  end(): void {
    this.ended = true;
    for (const waiter of this.waiters.splice(0)) waiter(null);
  }

  next(): Promise<string | null> {
    if (this.queue.length > 0) return Promise.resolve(this.queue.shift()!);
    if (this.ended) return Promise.resolve(null);
    return new Promise((resolve) => this.waiters.push(resolve));
  }
}

export class ClientSession {
  readonly handshake: Handshake;
  private socket: net.Socket;
  private reader: LineReader;
  private closed = false;

  constructor(socket: net.Socket, reader: LineReader, handshake: Handshake) {
    this.socket = socket;
    this.reader = reader;
    this.handshake = handshake;
  }

  /** Next frame from the environment, or null on disconnect. */
  async nextFrame(): Promise<Frame | null> {
    const line = await this.reader.next();
    if (line === null) return null;
    const space = line.indexOf(' ');
    if (space < 0) return { kind: line, payload: '' };
    return { kind: line.slice(0, space), payload: line.slice(space + 1) };
  }

  /** Next environment message (an `M` frame), decoded per the session mode. */
  async nextMessage(): Promise<string | null> {
    for (;;) {
      const frame = await this.nextFrame();
      if (frame === null) return null;
      if (frame.kind === 'M') {
        return this.handshake.mode === 'bit' ? decodeBits(frame.payload) : frame.payload;
      }
      // out-of-order frames are skipped; nextReward handles R explicitly
    }
  }

  async nextReward(): Promise<number | null> {
    for (;;) {
      const frame = await this.nextFrame();
      if (frame === null) return null;
      if (frame.kind === 'R') return parseInt(frame.payload, 10);
    }
  }

  /** Send an answer; a terminating period is appended if missing. */
  sendAnswer(text: string): void {
    const answer = text.endsWith('.') ? text : text + '.';
    const payload = this.handshake.mode === 'bit' ? encodeMessage(answer) : answer;
    this.socket.write(`A ${payload}\n`);
  }

  /** Politely end the session. */
  bye(): void {
    if (!this.closed) {
      this.socket.write('BYE\n');
      this.socket.end();
      this.closed = true;
    }
  }

  close(): void {
    if (!this.closed) {
      this.socket.destroy();
      this.closed = true;
    }
  }
}

export async function connect(options: ConnectOptions): Promise<ClientSession> {
  const timeoutMs = options.timeoutMs ?? 10_000;
  const socket = net.createConnection({ host: options.host, port: options.port });
  socket.setEncoding('ascii');
  const reader = new LineReader();

  await new Promise<void>((resolve, reject) => {
    const onError = (err: Error) => {
      socket.destroy();
      reject(err);
    };
    const timer = setTimeout(() => onError(new Error('connect timeout')), timeoutMs);
    socket.once('connect', () => {
      clearTimeout(timer);
      socket.removeListener('error', onError);
      resolve();
    });
    socket.once('error', onError);
  });

  socket.on('data', (chunk: string | Buffer) => reader.push(chunk.toString('ascii')));
  socket.on('close', () => reader.end());
  socket.on('error', () => reader.end());

  const hello = await reader.next();
  if (hello === null) {
    socket.destroy();
    throw new Error('server closed before handshake');
  }
  try {
    return new ClientSession(socket, reader, parseHello(hello));
  } catch (err) {
    socket.destroy();
    throw err;
  }
}

export function parseHello(line: string): Handshake {
  const match = /^HELLO (.+?) mode=(bit|byte) max_answer_bits=(\d+)$/.exec(line);
  if (!match || match[1] !== PROTOCOL_ID) {
    throw new HandshakeMismatchError(`unsupported handshake: ${line}`);
  }
  return { mode: match[2] as 'bit' | 'byte', maxAnswerBits: parseInt(match[3], 10) };
}

/**
 * Drive the prompt -> answer -> reward -> feedback loop.
 * Resolves to the cumulative reward when the episode budget is spent or the
 * server disconnects.
 */
export async function runAgent(
  session: ClientSession,
  answerFn: AnswerFn,
  options: RunOptions = {},
): Promise<number> {
  let reward = 0;
  let remaining = options.episodes ?? Infinity;
  while (remaining > 0) {
    const prompt = await session.nextMessage();
    if (prompt === null) break;
    options.onMessage?.(prompt, 'prompt');
    session.sendAnswer(answerFn(prompt));
    const r = await session.nextReward();
    if (r === null) break;
    reward += r;
    options.onReward?.(r);
    const feedback = await session.nextMessage();
    if (feedback === null) break;
    options.onMessage?.(feedback, 'feedback');
    remaining -= 1;
  }
  session.bye();
  return reward;
}
