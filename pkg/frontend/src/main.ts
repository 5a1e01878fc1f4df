/** Browser entry point: mounts the dashboard and wires controls to the controller. */

import { ConductClient } from "./api.js";
import { POLL_INTERVAL_MS, SessionController } from "./controller.js";
import { outcomeName, toDashboard, toWhatIfColumn } from "./model.js";
import { renderDashboard, renderWhatIfPanel } from "./render.js";

function mount(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const base = params.get("service") ?? "";
  if (!sessionId) {
    root.innerHTML =
      "<p>Open with <code>?session=&lt;id&gt;</code> (and optional <code>&amp;service=http://host:port</code>).</p>";
    return;
  }
  const client = new ConductClient(base, (input, init) => fetch(input, init), params.get("token"));
  const panel = document.createElement("div");
  const controller = new SessionController(client, sessionId, (view, stale) => {
    root.innerHTML = renderDashboard(toDashboard(view), stale);
    root.appendChild(panel);
    wire();
  });

  function wire(): void {
    const assign = document.getElementById("next-assignment");
    assign?.addEventListener("click", () => void controller.requestAssignment());
    for (const button of Array.from(document.querySelectorAll("button.outcome"))) {
      button.addEventListener("click", () => {
        const arm = Number(button.getAttribute("data-arm"));
        const outcome = Number(button.getAttribute("data-outcome"));
        void controller.submitOutcome(arm, outcome);
      });
    }
    const whatif = document.getElementById("open-whatif");
    whatif?.addEventListener("click", () => {
      const arm = Number(whatif.getAttribute("data-arm"));
      const view = controller.view;
      if (!view) return;
      void controller.loadWhatIf(arm, view.gamma.length).then((previews) => {
        const columns = previews.map((preview, outcome) =>
          toWhatIfColumn(view, preview, outcome, outcomeName(outcome, view.gamma.length)),
        );
        panel.innerHTML = renderWhatIfPanel(arm, columns);
      });
    });
  }

  void controller.refresh();
  window.setInterval(() => void controller.poll(), POLL_INTERVAL_MS);
}

mount();
