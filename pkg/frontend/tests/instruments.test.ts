import { describe, expect, it } from "vitest";

import { headingBugOffset, renderInstruments, type FrameSize } from "../src/instruments.js";
import type { ServerMsg, StateMsg } from "../src/protocol.js";
import { CockpitViewModel } from "../src/viewmodel.js";

const FRAME: FrameSize = { width: 960, height: 540 };

function stateMsg(partial: Partial<StateMsg> = {}): StateMsg {
  return {
    type: "state", t: 2.5, heading: 25, altitude: 1000, airspeed: 60,
    pitch_att: 0, roll_att: 0, target_heading: 25,
    ...partial,
  };
}

function connectedVm(state: StateMsg): CockpitViewModel {
  const vm = new CockpitViewModel();
  vm.onOpen();
  vm.applyMessage(state, 1000);
  return vm;
}

describe("headingBugOffset", () => {
  it("is zero on target and wraps through north", () => {
    expect(headingBugOffset(25, 25)).toBe(0);
    expect(headingBugOffset(350, 10, 4)).toBe(20 * 4);
    expect(headingBugOffset(10, 350, 4)).toBe(-20 * 4);
  });
});

describe("renderInstruments", () => {
  it("draws a level centered horizon for zero pitch and roll", () => {
    const ops = renderInstruments(connectedVm(stateMsg()), FRAME, 1000);
    const horizon = ops.find((op) => op.kind === "line" && op.color === "#ffffff");
    expect(horizon).toBeDefined();
    if (horizon?.kind === "line") {
      expect(horizon.y1).toBeCloseTo(horizon.y2, 10);
      expect((horizon.y1 + horizon.y2) / 2).toBeCloseTo(FRAME.height / 2 + 20, 10);
      expect((horizon.x1 + horizon.x2) / 2).toBeCloseTo(FRAME.width / 2, 10);
    }
  });

  it("centers the heading bug when on target", () => {
    const ops = renderInstruments(connectedVm(stateMsg()), FRAME, 1000);
    const bug = ops.find((op) => op.kind === "line" && op.color === "#ff4081");
    expect(bug).toBeDefined();
    if (bug?.kind === "line") {
      expect(bug.x1).toBe(FRAME.width / 2);
    }
  });

  it("offsets the bug when the target is right of the heading", () => {
    const ops = renderInstruments(connectedVm(stateMsg({ heading: 20, target_heading: 30 })), FRAME, 1000);
    const bug = ops.find((op) => op.kind === "line" && op.color === "#ff4081");
    if (bug?.kind === "line") {
      expect(bug.x1).toBeGreaterThan(FRAME.width / 2);
    }
  });

  it("shows airspeed and altitude readouts from the wire values", () => {
    const ops = renderInstruments(
      connectedVm(stateMsg({ airspeed: 61.25, altitude: 987.4 })), FRAME, 1000,
    );
    const texts = ops.filter((op) => op.kind === "text").map((op) => op.text);
    expect(texts).toContain("61.3 m/s");
    expect(texts).toContain("987 m");
  });

  it("grays out with a reconnect banner when disconnected", () => {
    const vm = new CockpitViewModel();
    vm.onOpen();
    vm.applyMessage(stateMsg(), 0);
    vm.onClose();
    const ops = renderInstruments(vm, FRAME, 5000);
    const texts = ops.filter((op) => op.kind === "text").map((op) => op.text);
    expect(texts.some((t) => t.includes("reconnecting"))).toBe(true);
  });

  it("flags stale data after one second without a state message", () => {
    const vm = connectedVm(stateMsg());
    const fresh = renderInstruments(vm, FRAME, 1900);
    const stale = renderInstruments(vm, FRAME, 2100);
    const textsOf = (ops: ReturnType<typeof renderInstruments>) =>
      ops.filter((op) => op.kind === "text").map((op) => op.text);
    expect(textsOf(fresh)).not.toContain("STALE DATA");
    expect(textsOf(stale)).toContain("STALE DATA");
  });

  it("rendering a recorded message stream is deterministic", () => {
    const stream: ServerMsg[] = [
      stateMsg({ t: 0.0, heading: 20 }),
      stateMsg({ t: 0.05, heading: 20.5, roll_att: -5 }),
      {
        type: "feedback", t: 0.05, verification: "OnTrack", active: false, hint: "",
        flags: [],
        agent_line: { center_x: 0, center_y: 0, slope_angle: 0 },
        student_line: { center_x: 0, center_y: 0, slope_angle: 0 },
      },
      stateMsg({ t: 0.1, heading: 21, pitch_att: 1.5 }),
    ];
    const render = () => {
      const vm = new CockpitViewModel();
      vm.onOpen();
      for (const msg of stream) vm.applyMessage(msg, 500);
      return renderInstruments(vm, FRAME, 600);
    };
    expect(render()).toEqual(render());
  });
});
