/**
 * HTML rendering for the dashboard and what-if panel.
 *
 * Pure string templates over the view models so rendering is unit-testable
 * without a DOM; main.ts mounts the output.
 */

import type { DashboardModel, WhatIfColumn } from "./model.js";
import { armLabel } from "./model.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderDashboard(model: DashboardModel, stale = false): string {
  const banner = stale
    ? `<div class="banner stale">View out of date; refreshing from the server.</div>`
    : "";
  const status =
    model.status === "terminated"
      ? `<div class="banner terminated">Trial terminated: no admissible arm remains.</div>`
      : model.status === "completed"
        ? `<div class="banner completed">All patients treated; request the final recommendation.</div>`
        : "";
  const recommendation =
    model.recommended && model.recommendation !== null
      ? `<div class="banner recommendation">Final recommendation: <b>${armLabel(model.recommendation)}</b></div>`
      : model.recommended
        ? `<div class="banner terminated">Final outcome: no arm can be recommended.</div>`
        : "";
  const rows = model.rows
    .map((row) => {
      const classes = [
        row.recommended ? "recommended" : "",
        row.admissible ? "" : "inadmissible",
        row.pending ? "pending" : "",
      ]
        .filter(Boolean)
        .join(" ");
      const tooltip = row.admissible
        ? ""
        : ` title="excluded by safety: overdose probability ${row.overdoseProbability ?? "n/a"} exceeds threshold ${row.safetyThreshold ?? "n/a"}"`;
      const safety =
        row.safetyThreshold === null
          ? ""
          : `<td>${row.safetyThreshold}</td><td>${row.overdoseProbability}</td>`;
      const prob = row.selectionProbability === null ? "" : `<td>${row.selectionProbability}</td>`;
      return (
        `<tr class="${classes}" data-arm="${row.index}"${tooltip}>` +
        `<td>${esc(row.label)}</td><td>${row.n}</td><td>${esc(row.counts)}</td>` +
        `<td>${esc(row.mode)}</td><td>${row.delta}</td><td>${row.deltaFinal}</td>` +
        prob +
        safety +
        `<td>${row.admissible ? "yes" : "no"}</td></tr>`
      );
    })
    .join("");
  const hasSafety = model.rows.some((r) => r.safetyThreshold !== null);
  const hasProb = model.rows.some((r) => r.selectionProbability !== null);
  const head =
    `<th>arm</th><th>n</th><th>counts</th><th>posterior mode</th>` +
    `<th>criterion</th><th>final criterion</th>` +
    (hasProb ? "<th>assign prob</th>" : "") +
    (hasSafety ? "<th>threshold</th><th>overdose prob</th>" : "") +
    `<th>admissible</th>`;
  const controls = model.terminated || model.recommended ? "" : renderControls(model);
  return (
    banner +
    status +
    recommendation +
    `<div class="progress">Patients: ${esc(model.progress)} (seq ${model.seq})</div>` +
    `<table class="arms"><thead><tr>${head}</tr></thead><tbody>${rows}</tbody></table>` +
    controls
  );
}

function renderControls(model: DashboardModel): string {
  if (model.pendingArm === null) {
    return `<div class="controls"><button id="next-assignment">Assign next patient</button></div>`;
  }
  const outcomes = Array.from({ length: model.outcomes }, (_, i) => i)
    .map(
      (i) =>
        `<button class="outcome" data-arm="${model.pendingArm}" data-outcome="${i}">record outcome ${i}</button>`,
    )
    .join(" ");
  return (
    `<div class="controls">Pending: <b>${armLabel(model.pendingArm)}</b> ${outcomes} ` +
    `<button id="open-whatif" data-arm="${model.pendingArm}">preview outcomes</button></div>`
  );
}

export function renderWhatIfPanel(arm: number, columns: WhatIfColumn[]): string {
  const blocks = columns
    .map((column) => {
      const flips =
        column.becomesInadmissible.length === 0
          ? ""
          : `<div class="flip">leaves the admissible set: ${column.becomesInadmissible
              .map(armLabel)
              .join(", ")}</div>`;
      const next =
        column.nextArm === null
          ? `<div class="next">next: trial would terminate</div>`
          : `<div class="next">next assignment: ${armLabel(column.nextArm)}</div>`;
      const rows = column.rows
        .map(
          (row) =>
            `<tr class="${row.admissible ? "" : "inadmissible"}">` +
            `<td>${esc(row.label)}</td><td>${row.delta}</td><td>${row.admissible ? "yes" : "no"}</td></tr>`,
        )
        .join("");
      return (
        `<div class="whatif-column" data-outcome="${column.outcome}">` +
        `<h3>if ${esc(column.title)}</h3>${next}${flips}` +
        `<table><thead><tr><th>arm</th><th>criterion</th><th>admissible</th></tr></thead>` +
        `<tbody>${rows}</tbody></table></div>`
      );
    })
    .join("");
  return `<div class="whatif" data-arm="${arm}"><h2>What if on ${armLabel(arm)}</h2>${blocks}</div>`;
}
