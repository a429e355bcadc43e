#!/usr/bin/env node
/**
 * CLI: render simulator CSV outputs into figure SVGs.
 *
 *   node dist/main.js --figure 4 --input runs/fig04 --out fig04.svg
 *   node dist/main.js --list
 */

import { writeFileSync } from "node:fs";

import { RECIPES } from "./recipes.js";
import { renderRecipe } from "./render.js";

function fail(message: string): never {
  process.stderr.write(`error: ${message}\n`);
  process.exit(2);
}

function parseArgs(argv: string[]): { figure?: number; input?: string; out?: string; list: boolean } {
  const out: { figure?: number; input?: string; out?: string; list: boolean } = { list: false };
  for (let k = 0; k < argv.length; k += 1) {
    const arg = argv[k];
    if (arg === "--list") out.list = true;
    else if (arg === "--figure") out.figure = Number(argv[++k]);
    else if (arg === "--input") out.input = argv[++k];
    else if (arg === "--out") out.out = argv[++k];
    else fail(`unknown argument ${arg}`);
  }
  return out;
}

const args = parseArgs(process.argv.slice(2));
if (args.list) {
  for (const recipe of RECIPES) {
    process.stdout.write(`fig${recipe.id}: ${recipe.title} (inputs: ${recipe.inputs.join(", ")})\n`);
  }
  process.exit(0);
}
if (args.figure === undefined || !Number.isInteger(args.figure)) fail("--figure N is required");
if (!args.input) fail("--input RUN_DIR is required");
if (!args.out) fail("--out FILE.svg is required");

try {
  const svg = renderRecipe(args.figure, args.input);
  writeFileSync(args.out, svg);
  process.stdout.write(`wrote ${args.out}\n`);
} catch (err) {
  fail((err as Error).message);
}
