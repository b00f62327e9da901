import net from 'node:net';
import { afterEach, describe, expect, it } from 'vitest';
import { HandshakeMismatchError, connect, parseHello } from '../src/client.js';
import { encodeMessage } from '../src/codec.js';

let servers: net.Server[] = [];

function fakeServer(hello: string, onConnection?: (sock: net.Socket) => void): Promise<number> {
  return new Promise((resolve) => {
    const server = net.createServer((sock) => {
      sock.write(hello + '\n');
      onConnection?.(sock);
    });
    servers.push(server);
    server.listen(0, '127.0.0.1', () => {
      resolve((server.address() as net.AddressInfo).port);
    });
  });
}

afterEach(() => {
  for (const server of servers) server.close();
  servers = [];
});

describe('handshake', () => {
  it('parses a v1 HELLO', () => {
    const hs = parseHello('HELLO commai-mini v1 mode=bit max_answer_bits=800');
    expect(hs).toEqual({ mode: 'bit', maxAnswerBits: 800 });
  });

  it('takes mode and limits from the server, not assumptions', async () => {
    const port = await fakeServer('HELLO commai-mini v1 mode=byte max_answer_bits=64');
    const session = await connect({ host: '127.0.0.1', port });
    expect(session.handshake.mode).toBe('byte');
    expect(session.handshake.maxAnswerBits).toBe(64);
    session.close();
  });

  it('rejects unknown protocol versions', async () => {
    const port = await fakeServer('HELLO commai-mini v2 mode=bit max_answer_bits=800');
    await expect(connect({ host: '127.0.0.1', port })).rejects.toBeInstanceOf(
      HandshakeMismatchError,
    );
  });

  it('rejects when nothing is listening', async () => {
    const port = await fakeServer('unused');
    servers.pop()!.close();
    await new Promise((r) => setTimeout(r, 20));
    await expect(connect({ host: '127.0.0.1', port })).rejects.toThrow();
  });
});

describe('frame loop', () => {
  it('decodes bit-mode messages and auto-terminates answers', async () => {
    const seen: string[] = [];
    const port = await fakeServer('HELLO commai-mini v1 mode=bit max_answer_bits=800', (sock) => {
      sock.write(`M ${encodeMessage('description: C; verify: CCCC.')}\n`);
      sock.on('data', (chunk) => {
        seen.push(chunk.toString('ascii'));
        sock.write('R 1\n');
        sock.write(`M ${encodeMessage('correct.')}\n`);
      });
    });
    const session = await connect({ host: '127.0.0.1', port });
    const prompt = await session.nextMessage();
    expect(prompt).toBe('description: C; verify: CCCC.');
    session.sendAnswer('true'); // no period: SDK appends it
    expect(await session.nextReward()).toBe(1);
    expect(await session.nextMessage()).toBe('correct.');
    expect(seen[0]).toBe(`A ${encodeMessage('true.')}\n`);
    session.bye();
  });
});
