/** Minimal --key value argv parsing; flags without values become "true". */

export function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      out.set(key, argv[++i]);
    } else {
      out.set(key, "true");
    }
  }
  return out;
}

export function requireArg(args: Map<string, string>, key: string): string {
  const v = args.get(key);
  if (v === undefined) {
    throw new Error(`missing required --${key}`);
  }
  return v;
}

export function intArg(args: Map<string, string>, key: string, dflt: number): number {
  const v = args.get(key);
  return v === undefined ? dflt : parseInt(v, 10);
}

export function floatArg(args: Map<string, string>, key: string, dflt: number): number {
  const v = args.get(key);
  return v === undefined ? dflt : parseFloat(v);
}
