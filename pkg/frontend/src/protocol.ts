/**
 * Session line protocol, client side. One JSON object per line; over a
 * WebSocket each text frame carries exactly one line, over TCP the lines
 * are newline-delimited.
 */

export interface ControlMsg {
  type: "control";
  t: number;
  yp: number;
  yr: number;
}

export interface StartMsg {
  type: "start";
  target_heading?: number;
  target_altitude?: number;
  target_airspeed?: number;
  duration?: number;
  seed?: number;
  initial_heading?: number;
}

export interface StopMsg {
  type: "stop";
}

export type ClientMsg = ControlMsg | StartMsg | StopMsg;

export interface StateMsg {
  type: "state";
  t: number;
  heading: number;
  altitude: number;
  airspeed: number;
  pitch_att: number;
  roll_att: number;
  target_heading: number;
}

export interface FlagInfo {
  kind: string;
  t: number;
  magnitude: number;
  threshold: number;
}

export interface LineInfo {
  center_x: number;
  center_y: number;
  slope_angle: number;
}

export interface FeedbackMsg {
  type: "feedback";
  t: number;
  verification: string;
  active: boolean;
  hint: string;
  flags: FlagInfo[];
  agent_line: LineInfo;
  student_line: LineInfo;
}

export interface EndMsg {
  type: "end";
  summary: Record<string, unknown>;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = StateMsg | FeedbackMsg | EndMsg | ErrorMsg;

export function encodeMessage(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

function requireNumber(obj: Record<string, unknown>, field: string, where: string): number {
  const value = obj[field];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new Error(`${where}.${field}: expected a finite number`);
  }
  return value;
}

export function decodeServerMessage(line: string): ServerMsg {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    throw new Error(`malformed message line: ${String(err)}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("message is not an object");
  }
  const obj = parsed as Record<string, unknown>;
  const type = obj.type;
  switch (type) {
    case "state": {
      for (const f of ["t", "heading", "altitude", "airspeed", "pitch_att", "roll_att", "target_heading"]) {
        requireNumber(obj, f, "state");
      }
      return obj as unknown as StateMsg;
    }
    case "feedback": {
      requireNumber(obj, "t", "feedback");
      if (typeof obj.active !== "boolean") throw new Error("feedback.active: expected bool");
      if (typeof obj.hint !== "string") throw new Error("feedback.hint: expected string");
      if (!Array.isArray(obj.flags)) throw new Error("feedback.flags: expected list");
      for (const side of ["agent_line", "student_line"]) {
        const line_ = obj[side];
        if (typeof line_ !== "object" || line_ === null) {
          throw new Error(`feedback.${side}: expected object`);
        }
        for (const f of ["center_x", "center_y", "slope_angle"]) {
          requireNumber(line_ as Record<string, unknown>, f, `feedback.${side}`);
        }
      }
      return obj as unknown as FeedbackMsg;
    }
    case "end": {
      if (typeof obj.summary !== "object" || obj.summary === null) {
        throw new Error("end.summary: expected object");
      }
      return obj as unknown as EndMsg;
    }
    case "error": {
      if (typeof obj.message !== "string") throw new Error("error.message: expected string");
      return obj as unknown as ErrorMsg;
    }
    default:
      throw new Error(`unknown server message type: ${String(type)}`);
  }
}

/** Reassembles newline-delimited messages from arbitrary stream chunks. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    return parts.filter((p) => p.trim().length > 0);
  }
}
