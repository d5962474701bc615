import { AssignmentView } from "../src/api.js";

export function fixtureAssignment(overrides: Partial<AssignmentView> = {}): AssignmentView {
  return {
    rollout_index: 0,
    blinded_label: "R-0",
    ic_id: 3,
    ic_description: "bar pose 3",
    reference_image: null,
    rubric: [
      { id: "overall", text: "Energy bar ended up on the wooden tray?", is_overall_success: true },
      { id: "grasped", text: "Robot grasped the energy bar?", is_overall_success: false },
    ],
    ...overrides,
  };
}

export const FIXTURE_TASK = {
  name: "energy-bar",
  success_criteria:
    "Energy bar is on the wooden tray and the tray is on the table. " +
    "Collisions with other items are not failures.",
  rubric: [
    {
      id: "overall",
      text: "Energy bar ended up on the wooden tray?",
      is_overall_success: true,
    },
    { id: "grasped", text: "Robot grasped the energy bar?", is_overall_success: false },
  ],
  initial_conditions: Array.from({ length: 10 }, (_, i) => ({
    id: i,
    description: `bar pose ${i}`,
  })),
};
