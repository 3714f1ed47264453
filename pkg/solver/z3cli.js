#!/usr/bin/env node
// SMT-LIB 2 command-line front end for the WebAssembly build of Z3.
// Usage: z3cli.js [-version] [FILE]   (reads stdin when FILE is omitted)
// Prints the solver output (check-sat status lines, model blocks) to stdout.

"use strict";

const fs = require("fs");
const path = require("path");

function readInput(argv) {
  const args = argv.filter((a) => a !== "-version" && a !== "--version");
  if (args.length > 0) {
    return fs.readFileSync(args[0], "utf8");
  }
  return fs.readFileSync(0, "utf8");
}

async function main() {
  const { init } = require(path.join(__dirname, "node_modules", "z3-solver"));
  const { Z3 } = await init();
  const ctx = Z3.mk_context(Z3.mk_config());
  if (process.argv.includes("-version") || process.argv.includes("--version")) {
    const out = await Z3.eval_smtlib2_string(ctx, "(get-info :version)");
    process.stdout.write("Z3 (wasm) " + out);
    process.exit(0);
  }
  const script = readInput(process.argv.slice(2));
  const out = await Z3.eval_smtlib2_string(ctx, script);
  process.stdout.write(out);
  process.exit(0);
}

main().catch((err) => {
  process.stderr.write(String(err && err.stack ? err.stack : err) + "\n");
  process.exit(3);
});
