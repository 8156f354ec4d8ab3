/**
 * Browser entry point: connect the WebSocket, pump keyboard -> control
 * messages at the client tick, and render instruments plus the feedback
 * overlay from the latest known messages at display refresh.
 */

import { executeOps } from "./canvas.js";
import { WebSocketTransport } from "./client.js";
import { CLIENT_TICK_HZ, KeyboardYoke } from "./input.js";
import { renderInstruments } from "./instruments.js";
import { renderFeedbackOverlay, type SquareRect } from "./overlay.js";
import { decodeServerMessage, encodeMessage } from "./protocol.js";
import { CockpitViewModel } from "./viewmodel.js";

function setup(): void {
  const canvas = document.getElementById("cockpit") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("no 2d canvas context");
  const startButton = document.getElementById("start") as HTMLButtonElement;
  const headingInput = document.getElementById("target-heading") as HTMLInputElement;
  const durationInput = document.getElementById("duration") as HTMLInputElement;

  const vm = new CockpitViewModel();
  const yoke = new KeyboardYoke();
  const url = `ws://${window.location.host}/ws`;
  const transport = new WebSocketTransport(url);
  const startedAt = performance.now();

  transport.onOpen(() => vm.onOpen());
  transport.onClose(() => vm.onClose());
  transport.onLine((line) => {
    try {
      vm.applyMessage(decodeServerMessage(line), performance.now());
    } catch (err) {
      vm.lastError = String(err);
    }
  });

  startButton.addEventListener("click", () => {
    transport.sendLine(
      encodeMessage({
        type: "start",
        target_heading: Number(headingInput.value) || 0,
        duration: Number(durationInput.value) || 30,
      }),
    );
    canvas.focus();
  });

  const handled = new Set([
    "ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight", "KeyW", "KeyA", "KeyS", "KeyD",
  ]);
  window.addEventListener("keydown", (ev) => {
    if (handled.has(ev.code)) {
      yoke.keyDown(ev.code);
      ev.preventDefault();
    }
  });
  window.addEventListener("keyup", (ev) => {
    if (handled.has(ev.code)) {
      yoke.keyUp(ev.code);
      ev.preventDefault();
    }
  });
  window.addEventListener("blur", () => yoke.releaseAll());

  const tickMs = 1000 / CLIENT_TICK_HZ;
  window.setInterval(() => {
    yoke.update(tickMs / 1000);
    transport.sendLine(encodeMessage(yoke.controlMessage((performance.now() - startedAt) / 1000)));
  }, tickMs);

  const overlayRect: SquareRect = {
    x: canvas.width - 240,
    y: canvas.height - 300,
    size: 220,
  };
  const frame = { width: canvas.width, height: canvas.height };

  function render(): void {
    const now = performance.now();
    const ops = renderInstruments(vm, frame, now);
    ops.push(...renderFeedbackOverlay(vm.feedback, overlayRect));
    executeOps(ctx as CanvasRenderingContext2D, ops, frame.width, frame.height);
    window.requestAnimationFrame(render);
  }
  window.requestAnimationFrame(render);
}

window.addEventListener("DOMContentLoaded", setup);
