#!/usr/bin/env node
/** CLI: seaquake-render render --kind <k> --in <paths> --out <image.svg> */
import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { render, RenderRequest } from "./render.js";

const KINDS = ["trace", "comparison", "spectrogram", "snapshot", "ratio_map"];

function usage(): string {
  return [
    "usage: seaquake-render render --kind <kind> --in <p1[,p2,...]> --out <file.svg>",
    `  kinds: ${KINDS.join(", ")}`,
    "  options: --bandwidth <Hz>   annotate a spectrogram with guide lines",
    "           --title <text>     figure title",
  ].join("\n");
}

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    process.stderr.write(`unknown verb '${argv[0] ?? ""}'\n${usage()}\n`);
    return 2;
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: argv.slice(1),
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        bandwidth: { type: "string" },
        title: { type: "string" },
      },
    });
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${usage()}\n`);
    return 2;
  }
  const { kind, in: inputs, out } = parsed.values;
  if (!kind || !inputs || !out) {
    process.stderr.write(`--kind, --in and --out are required\n${usage()}\n`);
    return 2;
  }
  if (!KINDS.includes(kind)) {
    process.stderr.write(`unknown kind '${kind}' (${KINDS.join(", ")})\n`);
    return 2;
  }
  const req: RenderRequest = {
    kind: kind as RenderRequest["kind"],
    inputs: inputs.split(",").map((s) => s.trim()).filter((s) => s.length),
    output: out,
    title: parsed.values.title,
  };
  if (parsed.values.bandwidth !== undefined) {
    const bw = Number(parsed.values.bandwidth);
    if (!Number.isFinite(bw) || bw <= 0) {
      process.stderr.write(`--bandwidth must be a positive number\n`);
      return 2;
    }
    req.bandwidth = bw;
  }
  try {
    render(req);
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`missing input: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
  return 0;
}

const isMain = process.argv[1]?.endsWith("cli.js");
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
