// Screen rendering: test-case launcher, run status, approval review and
// verdict evidence. Approval is the human gate of the workflow, so the
// approve/reject actions stay disabled until an operator id is entered, and
// step edits are collected from the inline inputs at decision time.

import type { ApprovalDecision } from "./api.js";
import type {
  ApprovalPayload,
  RunSummary,
  TestCase,
  Verdict,
} from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function verdictBadge(doc: Document, kind: string | null): HTMLElement {
  const label = kind === null ? "n/a" : kind.replace("_", " ");
  const badge = el(doc, "span", `verdict verdict-${kind ?? "none"}`, label);
  badge.dataset.testid = `verdict-${kind ?? "none"}`;
  return badge;
}

export function renderTestCaseList(
  doc: Document,
  cases: TestCase[],
  onLaunch: (tcId: string, logContent: string) => void,
): HTMLElement {
  const root = el(doc, "div", "testcase-list");
  root.dataset.testid = "testcase-list";
  for (const testCase of cases) {
    const card = el(doc, "div", "testcase-card");
    card.dataset.testid = `testcase-${testCase.id}`;
    card.appendChild(el(doc, "h3", undefined, `${testCase.id}: ${testCase.title}`));
    card.appendChild(
      el(doc, "p", "testcase-meta",
         `${testCase.category} | components: ${testCase.components.join(", ")}`),
    );
    card.appendChild(el(doc, "p", undefined, testCase.description));

    const fileInput = el(doc, "input") as HTMLInputElement;
    fileInput.type = "file";
    fileInput.accept = ".json";
    fileInput.dataset.testid = `log-input-${testCase.id}`;
    const launch = el(doc, "button", "primary", "Launch run") as HTMLButtonElement;
    launch.dataset.testid = `launch-${testCase.id}`;
    launch.addEventListener("click", async () => {
      const file = fileInput.files?.[0];
      if (!file) return;
      onLaunch(testCase.id, await file.text());
    });
    card.appendChild(fileInput);
    card.appendChild(launch);
    root.appendChild(card);
  }
  return root;
}

export function renderRunStatus(doc: Document, run: RunSummary): HTMLElement {
  const root = el(doc, "div", "run-status");
  root.dataset.testid = "run-status";
  root.appendChild(el(doc, "h2", undefined, `Run ${run.run_id} (${run.tc_id})`));
  const state = el(doc, "p", `run-state state-${run.state}`, `state: ${run.state}`);
  state.dataset.testid = "run-state";
  root.appendChild(state);
  root.appendChild(
    el(doc, "p", "run-history", `history: ${run.state_history.join(" -> ")}`),
  );
  if (run.abort_cause) {
    root.appendChild(el(doc, "p", "abort-cause", `aborted: ${run.abort_cause}`));
  }
  return root;
}

export function renderApprovalScreen(
  doc: Document,
  payload: ApprovalPayload,
  onDecision: (decision: ApprovalDecision) => void,
): HTMLElement {
  const root = el(doc, "div", "approval-screen");
  root.dataset.testid = "approval-screen";
  root.appendChild(el(doc, "h2", undefined, "Review generated procedural flow"));

  const columns = el(doc, "div", "approval-columns");

  const stepsPanel = el(doc, "div", "panel steps-panel");
  stepsPanel.appendChild(el(doc, "h3", undefined, `Flow steps (${payload.flow.steps.length})`));
  const stepInputs: HTMLInputElement[] = [];
  const list = el(doc, "ol", "step-list");
  for (const step of payload.flow.steps) {
    const item = el(doc, "li", "step-item");
    item.dataset.testid = `flow-step-${step.ordinal}`;
    const input = el(doc, "input", "step-input") as HTMLInputElement;
    input.type = "text";
    input.value = step.description;
    input.dataset.testid = `step-input-${step.ordinal}`;
    stepInputs.push(input);
    item.appendChild(input);
    list.appendChild(item);
  }
  stepsPanel.appendChild(list);
  if (payload.flow.notes.length) {
    stepsPanel.appendChild(
      el(doc, "p", "flow-notes", `notes: ${payload.flow.notes.join("; ")}`),
    );
  }
  columns.appendChild(stepsPanel);

  const docsPanel = el(doc, "div", "panel docs-panel");
  docsPanel.appendChild(
    el(doc, "h3", undefined, `Supporting specifications (${payload.documents.length})`),
  );
  for (const ref of payload.documents) {
    const docCard = el(doc, "div", "doc-card");
    docCard.dataset.testid = `doc-ref-${ref.doc_id}`;
    docCard.appendChild(
      el(doc, "h4", undefined, `#${ref.rank} ${ref.doc_id}${ref.section ? ` (${ref.section})` : ""}`),
    );
    docCard.appendChild(el(doc, "blockquote", "doc-excerpt", ref.excerpt));
    docsPanel.appendChild(docCard);
  }
  columns.appendChild(docsPanel);
  root.appendChild(columns);

  const controls = el(doc, "div", "approval-controls");
  const operatorInput = el(doc, "input", "operator-input") as HTMLInputElement;
  operatorInput.type = "text";
  operatorInput.placeholder = "operator id";
  operatorInput.dataset.testid = "operator-input";

  const approveBtn = el(doc, "button", "primary", "Approve") as HTMLButtonElement;
  approveBtn.dataset.testid = "approve-button";
  approveBtn.disabled = true;
  const rejectBtn = el(doc, "button", "danger", "Reject") as HTMLButtonElement;
  rejectBtn.dataset.testid = "reject-button";
  rejectBtn.disabled = true;

  operatorInput.addEventListener("input", () => {
    const missing = operatorInput.value.trim() === "";
    approveBtn.disabled = missing;
    rejectBtn.disabled = missing;
  });

  const collectEdits = (): string[] | undefined => {
    const edited = stepInputs.map((input) => input.value);
    const changed = edited.some(
      (text, i) => text !== payload.flow.steps[i].description,
    );
    return changed ? edited : undefined;
  };

  approveBtn.addEventListener("click", () => {
    onDecision({
      decision: "approve",
      operator: operatorInput.value.trim(),
      edited_steps: collectEdits(),
    });
  });
  rejectBtn.addEventListener("click", () => {
    onDecision({
      decision: "reject",
      operator: operatorInput.value.trim(),
      edited_steps: collectEdits(),
    });
  });

  controls.appendChild(operatorInput);
  controls.appendChild(approveBtn);
  controls.appendChild(rejectBtn);
  root.appendChild(controls);
  return root;
}

function renderEvidence(doc: Document, verdict: Verdict): HTMLElement {
  const evidence = el(doc, "div", "evidence");
  if (verdict.inference) {
    evidence.appendChild(el(doc, "p", "inference", verdict.inference));
  }
  if (verdict.missing_steps.length) {
    evidence.appendChild(
      el(doc, "p", "missing-steps",
         `missing steps: ${verdict.missing_steps.join(", ")}`),
    );
  }
  if (verdict.out_of_order_pairs.length) {
    const lines = verdict.out_of_order_pairs
      .map(([[sa, ia], [sb, ib]]) =>
        `step ${sb} at log ${ib} precedes step ${sa} at log ${ia}`)
      .join("; ");
    evidence.appendChild(el(doc, "p", "out-of-order", `out of order: ${lines}`));
  }
  return evidence;
}

export function renderVerdicts(doc: Document, run: RunSummary): HTMLElement {
  const root = el(doc, "div", "verdicts");
  root.dataset.testid = "verdicts";

  const validation = el(doc, "div", "panel verdict-panel");
  validation.appendChild(el(doc, "h3", undefined, "Greedy validation"));
  validation.appendChild(verdictBadge(doc, run.val_verdict?.kind ?? null));
  if (run.val_verdict) validation.appendChild(renderEvidence(doc, run.val_verdict));
  root.appendChild(validation);

  // the two verdicts are presented side by side, never collapsed
  const debugPanel = el(doc, "div", "panel verdict-panel");
  debugPanel.appendChild(el(doc, "h3", undefined, "Debug analysis"));
  if (run.debug_verdict) {
    debugPanel.appendChild(verdictBadge(doc, run.debug_verdict.kind));
    debugPanel.appendChild(renderEvidence(doc, run.debug_verdict));
  } else {
    debugPanel.appendChild(
      el(doc, "p", "no-debug", "not run (validation passed)"),
    );
  }
  root.appendChild(debugPanel);
  return root;
}
