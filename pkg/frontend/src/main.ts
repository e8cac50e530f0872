#!/usr/bin/env node
/**
 * render_figure <recipe-file>
 *
 * Reads a flat key=value recipe pointing at the simulation CLI's field and
 * trajectory CSVs and writes the rendered PNG.  Any recipe or CSV schema
 * mismatch aborts with a nonzero exit code.
 */

import { loadRecipe } from "./recipe";
import { render } from "./render";

export function main(argv: string[]): number {
  if (argv.length !== 1) {
    process.stderr.write("usage: render_figure <recipe-file>\n");
    return 2;
  }
  try {
    const recipe = loadRecipe(argv[0]);
    render(recipe);
    return 0;
  } catch (err) {
    process.stderr.write(`render_figure: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
