/** Scripted round-trip against a live service.
 *
 * Drives create-session -> candidates -> select -> resketch -> render,
 * then asks the server to replay the session history from scratch and
 * checks the replayed SVG equals the rendered one byte for byte.
 *
 * Usage: node dist/roundtrip.js [http://127.0.0.1:8008]
 * Exits 0 on success, 1 on any mismatch or error.
 */

import { ApiClient } from "./api.js";

function firstDifference(a: string, b: string): number {
  const limit = Math.min(a.length, b.length);
  for (let i = 0; i < limit; i += 1) {
    if (a[i] !== b[i]) return i;
  }
  return a.length === b.length ? -1 : limit;
}

async function main(): Promise<number> {
  const baseUrl = process.argv[2] ?? "http://127.0.0.1:8008";
  const api = new ApiClient(baseUrl);

  const health = await api.healthz();
  console.log(`service ok; classes: ${health.classes.join(", ")}`);

  const created = await api.createSession("a horse under a tree", "rt-create");
  const sessionId = created.session_id;
  console.log(`session ${sessionId}`);

  const round = await api.getCandidates(sessionId, 4);
  console.log(`round ${round.round}: ${round.candidates.length} candidates`);
  const chosen = round.candidates[0];
  if (chosen === undefined) throw new Error("no candidates returned");

  const selected = await api.select(sessionId, chosen.candidate_id, "rt-select");
  console.log(
    `selected ${chosen.candidate_id}: ` +
      `${selected.selected.objects.length} objects`,
  );

  if (selected.object_seeds.length > 0) {
    await api.resketch(sessionId, 0, "rt-resketch");
    console.log("resketched object 0");
  } else {
    console.log("layout has no objects; skipping resketch");
  }

  const rendered = await api.renderSvg(sessionId);
  const replayed = await api.replaySvg(sessionId);

  if (rendered !== replayed) {
    const at = firstDifference(rendered, replayed);
    console.error(
      `MISMATCH: render (${rendered.length} bytes) != ` +
        `replay (${replayed.length} bytes), first difference at ${at}`,
    );
    return 1;
  }
  console.log(`round-trip OK: render == replay (${rendered.length} bytes)`);
  return 0;
}

main().then(
  (code) => process.exit(code),
  (error) => {
    console.error(`round-trip failed: ${String(error)}`);
    process.exit(1);
  },
);
