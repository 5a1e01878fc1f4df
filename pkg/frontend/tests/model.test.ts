import { describe, expect, it } from "vitest";

import { toDashboard, toWhatIfColumn, outcomeName } from "../src/model.js";
import { armView, sessionView } from "./helpers.js";

describe("toDashboard", () => {
  it("sorts arms by criterion value ascending", () => {
    const model = toDashboard(sessionView());
    expect(model.rows.map((r) => r.index)).toEqual([1, 0, 2]);
  });

  it("marks the next assignment as recommended", () => {
    const model = toDashboard(sessionView());
    const recommended = model.rows.filter((r) => r.recommended);
    expect(recommended).toHaveLength(1);
    expect(recommended[0].index).toBe(1);
  });

  it("carries server numbers verbatim at fixed precision", () => {
    const view = sessionView();
    const model = toDashboard(view);
    for (const arm of view.arms) {
      const row = model.rows.find((r) => r.index === arm.index)!;
      expect(row.delta).toBe(arm.delta.toFixed(4));
      expect(row.deltaFinal).toBe(arm.delta_final.toFixed(4));
      expect(row.safetyThreshold).toBe(arm.safety_threshold!.toFixed(4));
      expect(row.overdoseProbability).toBe(arm.overdose_probability!.toFixed(4));
    }
  });

  it("flags inadmissible arms", () => {
    const model = toDashboard(sessionView());
    expect(model.rows.find((r) => r.index === 2)!.admissible).toBe(false);
  });

  it("reports termination and hides next arm", () => {
    const view = sessionView({
      status: "terminated",
      next_preview: { kind: "terminate", arm: null, probabilities: null },
    });
    const model = toDashboard(view);
    expect(model.terminated).toBe(true);
    expect(model.nextArm).toBeNull();
  });
});

describe("toWhatIfColumn", () => {
  it("detects arms leaving the admissible set", () => {
    const current = sessionView();
    const preview = sessionView({
      hypothetical: true,
      arms: [
        armView({ index: 0, admissible: false, delta: 0.2 }),
        armView({ index: 1, delta: 0.05 }),
        armView({ index: 2, delta: 0.4, admissible: false }),
      ],
    });
    const column = toWhatIfColumn(current, preview, 0, outcomeName(0, 2));
    expect(column.becomesInadmissible).toEqual([0]);
    expect(column.title).toBe("toxicity");
  });

  it("names binary outcomes", () => {
    expect(outcomeName(1, 2)).toBe("no toxicity");
    expect(outcomeName(2, 3)).toBe("outcome 2");
  });
});
