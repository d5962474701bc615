import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ApiClient, rubricPayload } from "../src/api.js";
import { SessionViewModel } from "../src/session.js";
import { fixtureAssignment } from "./helpers.js";

const WIRE: Record<string, string> = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "wire.json"), "utf-8"),
);

function freshModel(): SessionViewModel {
  const vm = new SessionViewModel(new ApiClient("http://unused"), "s1");
  vm.startAssignment(fixtureAssignment());
  return vm;
}

describe("rubric form state", () => {
  it("starts with every question unanswered and submit disabled", () => {
    const vm = freshModel();
    expect(vm.unanswered()).toEqual(["overall", "grasped"]);
    expect(vm.canSubmit()).toBe(false);
  });

  it("enables submit only once all questions are answered", () => {
    const vm = freshModel();
    vm.setAnswer("overall", true);
    expect(vm.canSubmit()).toBe(false);
    expect(vm.unanswered()).toEqual(["grasped"]);
    vm.setAnswer("grasped", true);
    expect(vm.canSubmit()).toBe(true);
  });

  it("rejects answers for unknown questions", () => {
    const vm = freshModel();
    expect(() => vm.setAnswer("nope", true)).toThrow(/unknown question/);
  });

  it("refuses to build a payload while incomplete", () => {
    const vm = freshModel();
    vm.setAnswer("overall", false);
    expect(() => vm.payload()).toThrow(/grasped/);
  });

  it("resets the form when a new assignment starts", () => {
    const vm = freshModel();
    vm.setAnswer("overall", true);
    vm.setFailureNote("something");
    vm.startAssignment(fixtureAssignment({ rollout_index: 1, blinded_label: "R-1" }));
    expect(vm.unanswered()).toEqual(["overall", "grasped"]);
    expect(vm.form.failureNote).toBe("");
  });
});

describe("wire payloads", () => {
  it("all-yes submission matches the recorded fixture byte-for-byte", () => {
    const vm = freshModel();
    vm.setAnswer("overall", true);
    vm.setAnswer("grasped", true);
    expect(vm.payload()).toBe(WIRE.all_yes);
  });

  it("failure with note matches the recorded fixture byte-for-byte", () => {
    const vm = freshModel();
    vm.setAnswer("overall", false);
    vm.setAnswer("grasped", true);
    vm.setFailureNote("picked the bar up but moved away from the tray");
    expect(vm.payload()).toBe(WIRE.failure_with_note);
  });

  it("all-no submission matches the recorded fixture byte-for-byte", () => {
    const vm = freshModel();
    vm.setAnswer("overall", false);
    vm.setAnswer("grasped", false);
    vm.setFailureNote("failed to grasp or dropped the bar prematurely");
    expect(vm.payload()).toBe(WIRE.all_no);
  });

  it("payload key order is stable regardless of answer order", () => {
    expect(rubricPayload({ overall: true, grasped: true }, "")).toBe(
      rubricPayload({ grasped: true, overall: true }, ""),
    );
  });
});

describe("error handling", () => {
  it("keeps form state and sets a retry banner when submission fails", async () => {
    const failing = {
      next: async () => {
        throw new Error("network down");
      },
      submitRubric: async () => {
        throw new Error("network down");
      },
    } as unknown as ApiClient;
    const vm = new SessionViewModel(failing, "s1");
    vm.startAssignment(fixtureAssignment());
    vm.setAnswer("overall", true);
    vm.setAnswer("grasped", false);
    vm.setFailureNote("slipped");
    await expect(vm.submit()).rejects.toThrow("network down");
    expect(vm.errorBanner).toBe("network down");
    expect(vm.form.answers).toEqual({ overall: true, grasped: false });
    expect(vm.form.failureNote).toBe("slipped");
  });
});
