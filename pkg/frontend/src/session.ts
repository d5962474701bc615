/**
 * View model for one evaluator session.
 *
 * Pure state + transitions, no DOM: the view renders from this model and the
 * model only ever holds blinded data until a finalize summary arrives, so the
 * blinded-DOM invariant reduces to an invariant on this class.
 */
import {
  ApiClient,
  AssignmentView,
  FinalizeResponse,
  Progress,
  rubricPayload,
} from "./api.js";

export type AnswerState = Record<string, boolean | null>;

export interface RubricFormState {
  answers: AnswerState;
  failureNote: string;
}

export class SessionViewModel {
  progress: Progress | null = null;
  assignment: AssignmentView | null = null;
  form: RubricFormState = { answers: {}, failureNote: "" };
  summary: FinalizeResponse | null = null;
  complete = false;
  errorBanner: string | null = null;

  constructor(
    readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  /** Fetch the next blinded assignment and reset the rubric form for it. */
  async advance(): Promise<void> {
    const next = await this.api.next(this.sessionId);
    this.progress = next.progress;
    this.complete = next.complete;
    if (next.complete || next.assignment === null) {
      this.assignment = null;
      return;
    }
    this.startAssignment(next.assignment);
  }

  startAssignment(assignment: AssignmentView): void {
    this.assignment = assignment;
    const answers: AnswerState = {};
    for (const q of assignment.rubric) {
      answers[q.id] = null;
    }
    this.form = { answers, failureNote: "" };
  }

  setAnswer(questionId: string, value: boolean): void {
    if (!(questionId in this.form.answers)) {
      throw new Error(`unknown question ${questionId}`);
    }
    this.form.answers[questionId] = value;
  }

  setFailureNote(text: string): void {
    this.form.failureNote = text;
  }

  /** Question ids still lacking a yes/no answer, in rubric order. */
  unanswered(): string[] {
    if (this.assignment === null) return [];
    return this.assignment.rubric
      .map((q) => q.id)
      .filter((id) => this.form.answers[id] === null);
  }

  canSubmit(): boolean {
    return this.assignment !== null && this.unanswered().length === 0;
  }

  /** Exact request body that will go over the wire. */
  payload(): string {
    if (!this.canSubmit()) {
      throw new Error(
        `cannot submit, unanswered questions: ${this.unanswered().join(", ")}`,
      );
    }
    const answers: Record<string, boolean> = {};
    for (const [id, value] of Object.entries(this.form.answers)) {
      answers[id] = value as boolean;
    }
    return rubricPayload(answers, this.form.failureNote);
  }

  /** Submit the current rubric, then fetch the next assignment. */
  async submit(): Promise<void> {
    if (this.assignment === null) {
      throw new Error("no active assignment");
    }
    const body = this.payload();
    try {
      const resp = await this.api.submitRubric(
        this.sessionId,
        this.assignment.rollout_index,
        body,
      );
      this.progress = resp.progress;
      this.errorBanner = null;
    } catch (err) {
      // network or validation failure: keep the form state so nothing typed
      // by the evaluator is lost, surface a retry banner
      this.errorBanner = err instanceof Error ? err.message : String(err);
      throw err;
    }
    await this.advance();
  }

  async finalize(force = false): Promise<void> {
    this.summary = await this.api.finalize(this.sessionId, force);
    this.assignment = null;
    this.complete = true;
  }
}
