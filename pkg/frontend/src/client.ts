/**
 * Line transports. The browser speaks the protocol over a WebSocket
 * (one line per text frame); headless tests speak it over raw TCP with
 * newline framing. Both expose the same line-oriented surface.
 */

import { LineSplitter } from "./protocol.js";

export interface LineTransport {
  sendLine(line: string): void;
  onLine(handler: (line: string) => void): void;
  onOpen(handler: () => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements LineTransport {
  private ws: WebSocket;
  private lineHandlers: Array<(line: string) => void> = [];
  private openHandlers: Array<() => void> = [];
  private closeHandlers: Array<() => void> = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (ev) => {
      const data = typeof ev.data === "string" ? ev.data : "";
      for (const handler of this.lineHandlers) handler(data);
    };
    this.ws.onopen = () => {
      for (const handler of this.openHandlers) handler();
    };
    this.ws.onclose = () => {
      for (const handler of this.closeHandlers) handler();
    };
  }

  sendLine(data: string): void {
    if (this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(data);
    }
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onOpen(handler: () => void): void {
    this.openHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.ws.close();
  }
}

/** Node-only TCP transport for headless protocol clients (tests). */
export async function connectTcp(host: string, port: number): Promise<LineTransport> {
  const net = await import("node:net");
  const splitter = new LineSplitter();
  const lineHandlers: Array<(line: string) => void> = [];
  const openHandlers: Array<() => void> = [];
  const closeHandlers: Array<() => void> = [];

  const socket = net.createConnection({ host, port });
  socket.setEncoding("utf-8");
  socket.on("data", (chunk: string) => {
    for (const line of splitter.push(chunk)) {
      for (const handler of lineHandlers) handler(line);
    }
  });
  socket.on("close", () => {
    for (const handler of closeHandlers) handler();
  });

  await new Promise<void>((resolve, reject) => {
    socket.once("connect", () => {
      for (const handler of openHandlers) handler();
      resolve();
    });
    socket.once("error", reject);
  });

  return {
    sendLine(line: string): void {
      socket.write(line + "\n");
    },
    onLine(handler) {
      lineHandlers.push(handler);
    },
    onOpen(handler) {
      openHandlers.push(handler);
    },
    onClose(handler) {
      closeHandlers.push(handler);
    },
    close(): void {
      socket.end();
      socket.destroy();
    },
  };
}
