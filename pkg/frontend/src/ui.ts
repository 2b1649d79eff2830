/** DOM glue: applies the render model and wires clicks to the controller.
 * Grid cells render at 24 px or larger so squares stay easy to see. */

import type { RenderModel } from "./state.js";

export interface UiCallbacks {
  onStart: (scenarioName: string) => void;
  onCellClick: (row: number, col: number) => void;
  onFinishNote: (note: string) => void;
}

export class Ui {
  private gridEl: HTMLElement;
  private counterEl: HTMLElement;
  private noticeEl: HTMLElement;
  private instructionsEl: HTMLElement;
  private taskTextEl: HTMLElement;
  private scenarioSelect: HTMLSelectElement;
  private finishedEl: HTMLElement;
  private colorbarEl: HTMLElement;
  private cellEls: HTMLElement[] = [];
  private gridShape = "";

  constructor(
    root: Document,
    private callbacks: UiCallbacks,
  ) {
    this.gridEl = root.getElementById("grid")!;
    this.counterEl = root.getElementById("counter")!;
    this.noticeEl = root.getElementById("notice")!;
    this.instructionsEl = root.getElementById("instructions")!;
    this.taskTextEl = root.getElementById("task-text")!;
    this.scenarioSelect = root.getElementById("scenario") as HTMLSelectElement;
    this.finishedEl = root.getElementById("finished")!;
    this.colorbarEl = root.getElementById("colorbar")!;

    root.getElementById("start")!.addEventListener("click", () => {
      this.callbacks.onStart(this.scenarioSelect.value);
    });
    root.getElementById("submit-note")!.addEventListener("click", () => {
      const field = root.getElementById("note") as HTMLTextAreaElement;
      this.callbacks.onFinishNote(field.value);
      root.getElementById("note-form")!.classList.add("hidden");
      root.getElementById("note-thanks")!.classList.remove("hidden");
    });
  }

  setScenarios(names: string[]): void {
    this.scenarioSelect.innerHTML = "";
    for (const name of names) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      this.scenarioSelect.appendChild(option);
    }
  }

  private ensureGrid(rows: number, cols: number): void {
    const shape = `${rows}x${cols}`;
    if (shape === this.gridShape) return;
    this.gridShape = shape;
    this.gridEl.innerHTML = "";
    this.gridEl.style.gridTemplateColumns = `repeat(${cols}, var(--cell))`;
    this.cellEls = [];
    for (let row = 0; row < rows; row++) {
      for (let col = 0; col < cols; col++) {
        const el = document.createElement("div");
        el.className = "cell";
        el.dataset.row = String(row);
        el.dataset.col = String(col);
        el.addEventListener("click", () => this.callbacks.onCellClick(row, col));
        this.gridEl.appendChild(el);
        this.cellEls.push(el);
      }
    }
  }

  /** Applies the model; newlyRevealed cells (path order) get a staggered
   * fade-in so the reveal reads as the robot traversing its leg. */
  apply(model: RenderModel, newlyRevealed: Array<{ row: number; col: number }> = []): void {
    this.instructionsEl.classList.toggle("hidden", model.phase !== "instructions");
    this.finishedEl.classList.toggle("hidden", model.phase !== "finished");
    this.taskTextEl.textContent = model.taskText;
    this.counterEl.textContent = model.counterText;
    this.noticeEl.textContent = model.notice ?? "";
    this.noticeEl.classList.toggle("hidden", model.notice === null);

    if (model.phase === "instructions") return;
    const cols = model.cells.length
      ? Math.max(...model.cells.map((c) => c.col)) + 1
      : 0;
    const rows = cols ? model.cells.length / cols : 0;
    this.ensureGrid(rows, cols);

    const delayKeys = new Map(
      newlyRevealed.map((cell, i) => [`${cell.row},${cell.col}`, i]),
    );
    for (const cell of model.cells) {
      const el = this.cellEls[cell.row * cols + cell.col];
      el.style.backgroundColor = cell.color;
      const delay = delayKeys.get(`${cell.row},${cell.col}`);
      if (delay !== undefined) {
        el.style.animation = "none";
        void el.offsetWidth; // restart the animation
        el.style.animation = `reveal 160ms ease ${delay * 45}ms backwards`;
      }
    }
    this.gridEl.classList.toggle("disabled", !model.clicksEnabled);

    this.colorbarEl.innerHTML = "";
    for (const tick of model.colorbar) {
      const swatch = document.createElement("div");
      swatch.className = "swatch";
      swatch.style.backgroundColor = tick.color;
      swatch.title = tick.value.toFixed(1);
      this.colorbarEl.appendChild(swatch);
    }
  }
}
