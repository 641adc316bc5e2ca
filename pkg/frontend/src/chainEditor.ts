import type { ChainStep } from "./types.js";

/**
 * Client-side model of the editable proposed chain.  The picker restricts
 * inserts to registered api ids; argument references ($k) must point at an
 * earlier step, mirroring the server's validation.
 */
export class ChainEditor {
  private steps: ChainStep[];

  constructor(
    steps: ChainStep[],
    private readonly knownApis: Set<string>,
  ) {
    this.steps = steps.map((s) => ({ api: s.api, args: { ...s.args } }));
  }

  get length(): number {
    return this.steps.length;
  }

  list(): ChainStep[] {
    return this.steps.map((s) => ({ api: s.api, args: { ...s.args } }));
  }

  deleteStep(index: number): void {
    this.checkIndex(index);
    this.steps.splice(index, 1);
  }

  insertStep(index: number, api: string): void {
    if (!this.knownApis.has(api)) {
      throw new Error(`unknown api '${api}': pick one of the registered apis`);
    }
    if (index < 0 || index > this.steps.length) {
      throw new Error(`insert position ${index} out of range`);
    }
    this.steps.splice(index, 0, { api, args: {} });
  }

  moveStep(from: number, to: number): void {
    this.checkIndex(from);
    this.checkIndex(to);
    const [step] = this.steps.splice(from, 1);
    this.steps.splice(to, 0, step);
  }

  setBinding(index: number, name: string, value: string): void {
    this.checkIndex(index);
    if (!name) throw new Error("argument name must be non-empty");
    if (value === "") {
      delete this.steps[index].args[name];
      return;
    }
    this.steps[index].args[name] = value;
  }

  /** Problems that would make the server reject a confirm. */
  validate(): string[] {
    const problems: string[] = [];
    if (this.steps.length === 0) problems.push("chain must have at least one step");
    this.steps.forEach((step, i) => {
      if (!this.knownApis.has(step.api)) problems.push(`step ${i}: unknown api '${step.api}'`);
      for (const [name, value] of Object.entries(step.args)) {
        const ref = /^\$(\d+)$/.exec(value);
        if (ref && Number(ref[1]) >= i) {
          problems.push(`step ${i}: ${name}=${value} must reference an earlier step`);
        }
      }
    });
    return problems;
  }

  toPayload(): ChainStep[] {
    const problems = this.validate();
    if (problems.length) throw new Error(problems.join("; "));
    return this.list();
  }

  private checkIndex(index: number): void {
    if (index < 0 || index >= this.steps.length) {
      throw new Error(`step index ${index} out of range`);
    }
  }
}
