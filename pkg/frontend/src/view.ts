/**
 * DOM rendering for the evaluator console.
 *
 * Render functions are pure (state in, elements out) so tests can render a
 * view model into a detached root and inspect the DOM. While the session is
 * blinded only `blinded_label` identifies a rollout; policy ids appear solely
 * in the post-finalize summary, which is built from the finalize response.
 */
import { Comparison, FinalizeResponse, PolicyCounts } from "./api.js";
import { SessionViewModel } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
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

export function renderProgress(doc: Document, vm: SessionViewModel): HTMLElement {
  const bar = el(doc, "div", "progress");
  if (vm.progress) {
    bar.textContent = `${vm.progress.completed} / ${vm.progress.total} rollouts scored`;
  }
  return bar;
}

export function renderAssignment(doc: Document, vm: SessionViewModel): HTMLElement {
  const root = el(doc, "section", "assignment");
  const a = vm.assignment;
  if (a === null) {
    root.appendChild(el(doc, "p", "done", "Session complete."));
    return root;
  }
  root.appendChild(el(doc, "h2", "label", `Rollout ${a.blinded_label}`));
  const ic = el(doc, "div", "initial-condition");
  ic.appendChild(el(doc, "p", "ic-description", `IC ${a.ic_id}: ${a.ic_description}`));
  if (a.reference_image) {
    const img = el(doc, "img", "ic-reference");
    img.src = a.reference_image;
    img.alt = "initial-condition reference for overlay matching";
    ic.appendChild(img);
  }
  root.appendChild(ic);

  const form = el(doc, "form", "rubric");
  const unanswered = new Set(vm.unanswered());
  for (const q of a.rubric) {
    const row = el(doc, "fieldset", unanswered.has(q.id) ? "question unanswered" : "question");
    row.dataset.questionId = q.id;
    row.appendChild(el(doc, "legend", undefined, q.text));
    for (const value of [true, false]) {
      const label = el(doc, "label", undefined, value ? "yes" : "no");
      const input = el(doc, "input");
      input.type = "radio";
      input.name = q.id;
      input.value = String(value);
      input.checked = vm.form.answers[q.id] === value;
      label.prepend(input);
      row.appendChild(label);
    }
    form.appendChild(row);
  }
  const note = el(doc, "textarea", "failure-note");
  note.placeholder = "failure note (what went wrong, if anything)";
  note.value = vm.form.failureNote;
  form.appendChild(note);

  const submit = el(doc, "button", "submit", "Submit rubric");
  submit.type = "submit";
  submit.disabled = !vm.canSubmit();
  form.appendChild(submit);
  root.appendChild(form);

  if (vm.errorBanner) {
    root.appendChild(el(doc, "div", "error-banner", `${vm.errorBanner} — retry submit`));
  }
  return root;
}

function countsRow(doc: Document, policy: string, c: PolicyCounts): HTMLTableRowElement {
  const tr = el(doc, "tr");
  tr.appendChild(el(doc, "td", "policy", policy));
  tr.appendChild(el(doc, "td", "successes", String(c.successes)));
  tr.appendChild(el(doc, "td", "failures", String(c.failures)));
  const rate = c.total === 0 ? "0/0" : `${c.successes}/${c.total} (${(c.successes / c.total).toFixed(2)})`;
  tr.appendChild(el(doc, "td", "rate", rate));
  return tr;
}

function comparisonLine(c: Comparison): string {
  const [lo, hi] = c.diff_interval;
  const zero = c.excludes_zero ? "excludes zero" : "contains zero";
  return (
    `P(${c.second_policy} better than ${c.first_policy}) = ` +
    `${c.prob_second_better.toFixed(2)}; ${(c.level * 100).toFixed(0)}% interval ` +
    `[${lo.toFixed(2)}, ${hi.toFixed(2)}] (${zero})`
  );
}

export function renderSummary(doc: Document, summary: FinalizeResponse): HTMLElement {
  const root = el(doc, "section", "summary");
  root.appendChild(el(doc, "h2", undefined, "Unblinded summary"));

  const table = el(doc, "table", "success-table");
  const head = el(doc, "tr");
  for (const h of ["Policy", "Successes", "Failures", "Rate"]) {
    head.appendChild(el(doc, "th", undefined, h));
  }
  table.appendChild(head);
  for (const policy of summary.plan.policies) {
    table.appendChild(countsRow(doc, policy, summary.success_counts[policy]!));
  }
  root.appendChild(table);

  const comparisons = el(doc, "ul", "comparisons");
  for (const c of summary.comparisons) {
    comparisons.appendChild(el(doc, "li", undefined, comparisonLine(c)));
  }
  root.appendChild(comparisons);

  if (summary.excluded_rollouts.length > 0) {
    root.appendChild(
      el(
        doc,
        "p",
        "excluded",
        `Excluded incomplete rollouts: ${summary.excluded_rollouts.join(", ")}`,
      ),
    );
  }
  return root;
}

/** Full-page render into #app; used by main.ts and by the DOM tests. */
export function renderApp(doc: Document, vm: SessionViewModel, mount: HTMLElement): void {
  mount.replaceChildren();
  mount.appendChild(renderProgress(doc, vm));
  if (vm.summary) {
    mount.appendChild(renderSummary(doc, vm.summary));
  } else {
    mount.appendChild(renderAssignment(doc, vm));
    if (vm.complete) {
      const btn = el(doc, "button", "finalize", "Finalize and unblind");
      mount.appendChild(btn);
    }
  }
}
