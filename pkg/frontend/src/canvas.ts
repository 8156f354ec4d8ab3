/** Executes a frame description on a 2D canvas context. */

import type { DrawOp } from "./draw.js";

export function executeOps(ctx: CanvasRenderingContext2D, ops: DrawOp[],
                           width: number, height: number): void {
  for (const op of ops) {
    switch (op.kind) {
      case "clear":
        ctx.fillStyle = op.color;
        ctx.fillRect(0, 0, width, height);
        break;
      case "line":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.stroke();
        break;
      case "rect":
        if (op.fill) {
          ctx.fillStyle = op.color;
          ctx.fillRect(op.x, op.y, op.w, op.h);
        } else {
          ctx.strokeStyle = op.color;
          ctx.lineWidth = 1;
          ctx.strokeRect(op.x, op.y, op.w, op.h);
        }
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.r, 0, Math.PI * 2);
        if (op.fill) {
          ctx.fillStyle = op.color;
          ctx.fill();
        } else {
          ctx.strokeStyle = op.color;
          ctx.stroke();
        }
        break;
      case "text":
        ctx.fillStyle = op.color;
        ctx.font = `${op.size}px sans-serif`;
        ctx.textAlign = op.align;
        ctx.fillText(op.text, op.x, op.y);
        break;
    }
  }
}
