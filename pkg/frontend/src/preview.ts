/** Per-line attribution of a generated document via its manifest. */

import { ManifestObject } from "./api.js";

export interface AttributedLine {
  text: string;
  /** Scene path of the entity this line belongs to, null outside the scene. */
  path: string | null;
  /** Features that caused the entity and its components, declaration order lost. */
  causedBy: string[];
}

const OPEN_TAG = /^<([a-z][a-z0-9-]*)/;

function causesByPath(manifest: ManifestObject): Map<string, Set<string>> {
  const map = new Map<string, Set<string>>();
  for (const entry of manifest.entries) {
    let set = map.get(entry.path);
    if (set === undefined) {
      set = new Set<string>();
      map.set(entry.path, set);
    }
    for (const fid of entry.caused_by) {
      set.add(fid);
    }
  }
  return map;
}

/**
 * Pairs every document line with the features that caused it. Entity paths
 * follow the manifest's child-index discipline ("" is the scene root, "2/0"
 * the first child of the root's third child); lines outside the scene carry
 * no attribution.
 */
export function attributeDocument(
  document: string,
  manifest: ManifestObject,
): AttributedLine[] {
  const causes = causesByPath(manifest);
  const attributed: AttributedLine[] = [];
  const stack: { path: string; nextChild: number }[] = [];
  let insideScene = false;

  const lineFor = (text: string, path: string | null): AttributedLine => ({
    text,
    path,
    causedBy: path === null ? [] : Array.from(causes.get(path) ?? []).sort(),
  });

  for (const text of document.split("\n")) {
    const trimmed = text.trim();
    if (!insideScene) {
      if (trimmed.startsWith("<a-scene")) {
        attributed.push(lineFor(text, ""));
        if (!trimmed.endsWith("</a-scene>")) {
          stack.push({ path: "", nextChild: 0 });
          insideScene = true;
        }
      } else {
        attributed.push(lineFor(text, null));
      }
      continue;
    }

    if (trimmed.startsWith("</")) {
      const closed = stack.pop();
      attributed.push(lineFor(text, closed ? closed.path : null));
      insideScene = stack.length > 0;
      continue;
    }

    const open = OPEN_TAG.exec(trimmed);
    if (open === null) {
      const parent = stack[stack.length - 1];
      attributed.push(lineFor(text, parent ? parent.path : null));
      continue;
    }

    const tag = open[1] as string;
    const parent = stack[stack.length - 1] as { path: string; nextChild: number };
    const path = parent.path === "" ? String(parent.nextChild) : `${parent.path}/${parent.nextChild}`;
    parent.nextChild += 1;
    attributed.push(lineFor(text, path));
    if (!trimmed.endsWith(`</${tag}>`)) {
      stack.push({ path, nextChild: 0 });
    }
  }
  return attributed;
}
