import { readFileSync } from "node:fs";
import { join } from "node:path";

import { FigureRecipe, recipeFor } from "./recipes.js";
import { renderFigure } from "./svg.js";

/** Resolve a recipe's inputs from a run directory; all must exist up front. */
export function resolveInputs(recipe: FigureRecipe, inputDir: string): Map<string, string> {
  const files = new Map<string, string>();
  for (const name of recipe.inputs) {
    const path = join(inputDir, name);
    let text: string;
    try {
      text = readFileSync(path, "utf8");
    } catch {
      throw new Error(`recipe for figure ${recipe.id} needs ${path}, which is missing`);
    }
    files.set(name, text);
  }
  return files;
}

export function renderRecipe(figureId: number, inputDir: string): string {
  const recipe = recipeFor(figureId);
  const files = resolveInputs(recipe, inputDir);
  const panels = recipe.build(files);
  return renderFigure(panels, recipe.columns);
}
