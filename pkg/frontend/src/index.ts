export { decodeAnswer, decodeBits, encodeMessage } from './codec.js';
export type { LearnerAnswer, TerminatedBy } from './codec.js';
export {
  ClientSession,
  HandshakeMismatchError,
  connect,
  parseHello,
  runAgent,
} from './client.js';
export type { AnswerFn, ConnectOptions, Frame, Handshake, RunOptions } from './client.js';
