/**
 * End-to-end: spawn the real environment server, connect through the SDK,
 * and let the oracle-logic agent play 200 networked episodes. The SDK's
 * codec and frame handling must be flawless for this to stay at 100%.
 */

import { type ChildProcess, spawn } from 'node:child_process';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { connect, runAgent } from '../src/client.js';
import { oracleAnswer } from './oracle.js';

const REPO_ROOT = fileURLToPath(new URL('../..', import.meta.url));
const CONFIG = fileURLToPath(new URL('./fixtures/e2e_config.json', import.meta.url));

let server: ChildProcess;
let port = 0;

beforeAll(async () => {
  server = spawn(
    'python3',
    ['-m', 'commai_mini.cli', 'serve', '--port', '0', '--config', CONFIG, '--seed', '5'],
    { cwd: REPO_ROOT, stdio: ['ignore', 'pipe', 'inherit'] },
  );
  port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error('server did not start')), 20_000);
    let out = '';
    server.stdout!.on('data', (chunk) => {
      out += chunk.toString();
      const match = /listening on [^:]+:(\d+)/.exec(out);
      if (match) {
        clearTimeout(timer);
        resolve(parseInt(match[1], 10));
      }
    });
    server.on('exit', (code) => reject(new Error(`server exited early: ${code}`)));
  });
}, 30_000);

afterAll(() => {
  server?.kill('SIGTERM');
});

describe('networked oracle run', () => {
  it('earns full reward over 200 episodes', async () => {
    const session = await connect({ host: '127.0.0.1', port });
    expect(session.handshake.mode).toBe('bit');
    const episodes: Array<{ prompt: string; feedback: string }> = [];
    let current: { prompt: string; feedback: string } | null = null;
    const reward = await runAgent(session, oracleAnswer, {
      episodes: 200,
      onMessage: (text, role) => {
        if (role === 'prompt') {
          current = { prompt: text, feedback: '' };
          episodes.push(current);
        } else if (current) {
          current.feedback = text;
        }
      },
    });
    expect(episodes).toHaveLength(200);
    const failures = episodes.filter((e) => !e.feedback.toLowerCase().startsWith('correct'));
    expect(failures).toEqual([]);
    expect(reward).toBe(200);
  }, 60_000);

  it('a second session gets its own task stream', async () => {
    const prompts: string[] = [];
    const session = await connect({ host: '127.0.0.1', port });
    const reward = await runAgent(session, oracleAnswer, {
      episodes: 5,
      onMessage: (text, role) => {
        if (role === 'prompt') prompts.push(text);
      },
    });
    expect(reward).toBe(5);
    expect(prompts).toHaveLength(5);
  }, 30_000);

  it('empty answers are merely wrong; the loop keeps going', async () => {
    const rewards: number[] = [];
    const session = await connect({ host: '127.0.0.1', port });
    const reward = await runAgent(session, () => '', {
      episodes: 5,
      onReward: (r) => rewards.push(r),
    });
    expect(reward).toBe(0);
    expect(rewards).toEqual([0, 0, 0, 0, 0]);
  }, 30_000);
});
