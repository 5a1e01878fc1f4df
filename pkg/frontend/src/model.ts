/**
 * View-model mapping: pure reshaping of server views for display.
 *
 * The server is the single source of truth; nothing here recomputes
 * statistics. Numbers are carried through as fixed-precision strings so a
 * rendered cell equals the server value formatted once.
 */

import type { ArmView, SessionView } from "./api.js";

export interface ArmRow {
  index: number;
  label: string;
  n: number;
  counts: string;
  mode: string;
  delta: string;
  deltaFinal: string;
  admissible: boolean;
  recommended: boolean;
  pending: boolean;
  selectionProbability: string | null;
  safetyThreshold: string | null;
  overdoseProbability: string | null;
}

export interface DashboardModel {
  id: string;
  status: SessionView["status"];
  seq: number;
  progress: string;
  rows: ArmRow[]; // sorted by delta ascending
  pendingArm: number | null;
  nextArm: number | null;
  terminated: boolean;
  recommendation: number | null;
  recommended: boolean;
  outcomes: number;
}

export function fixed(value: number | null | undefined, digits = 4): string | null {
  if (value === null || value === undefined) return null;
  return value.toFixed(digits);
}

export function armLabel(index: number): string {
  return `d${index + 1}`;
}

/** The arm the design would assign next, when the rule is deterministic. */
export function recommendedArm(view: SessionView): number | null {
  if (view.next_preview.kind === "terminate") return null;
  return view.next_preview.arm;
}

export function toDashboard(view: SessionView): DashboardModel {
  const nextArm = recommendedArm(view);
  const rows = view.arms
    .map((arm: ArmView): ArmRow => ({
      index: arm.index,
      label: armLabel(arm.index),
      n: arm.n,
      counts: arm.counts.join("/"),
      mode: arm.posterior_mode.map((m) => m.toFixed(4)).join(", "),
      delta: arm.delta.toFixed(4),
      deltaFinal: arm.delta_final.toFixed(4),
      admissible: arm.admissible,
      recommended: nextArm === arm.index,
      pending: view.pending_assignment === arm.index,
      selectionProbability: fixed(arm.selection_probability),
      safetyThreshold: fixed(arm.safety_threshold ?? null),
      overdoseProbability: fixed(arm.overdose_probability ?? null),
    }))
    .sort((a, b) => Number(a.delta) - Number(b.delta) || a.index - b.index);
  return {
    id: view.id,
    status: view.status,
    seq: view.seq,
    progress: `${view.patients_treated} / ${view.max_patients}`,
    rows,
    pendingArm: view.pending_assignment,
    nextArm,
    terminated: view.status === "terminated",
    recommendation: view.recommendation,
    recommended: view.recommended,
    outcomes: view.gamma.length,
  };
}

export interface WhatIfColumn {
  outcome: number;
  title: string;
  rows: ArmRow[];
  nextArm: number | null;
  becomesInadmissible: number[]; // arms admissible now but not in the preview
}

export function toWhatIfColumn(
  current: SessionView,
  preview: SessionView,
  outcome: number,
  outcomeName: string,
): WhatIfColumn {
  const lost = current.arms
    .filter((arm, i) => arm.admissible && !preview.arms[i].admissible)
    .map((arm) => arm.index);
  const model = toDashboard(preview);
  return {
    outcome,
    title: outcomeName,
    rows: model.rows,
    nextArm: model.nextArm,
    becomesInadmissible: lost,
  };
}

export function outcomeName(index: number, total: number): string {
  if (total === 2) return index === 0 ? "toxicity" : "no toxicity";
  return `outcome ${index}`;
}
