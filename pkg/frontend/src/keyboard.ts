// Keyboard shortcuts: digits 1..C pick a class for the current card.

export function labelFromKey(key: string, numClasses: number): number | null {
  if (!/^[1-9]$/.test(key)) return null;
  const idx = Number(key) - 1;
  return idx < numClasses ? idx : null;
}

interface KeyEventLike {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  target?: unknown;
}

function isEditingTarget(target: unknown): boolean {
  const tag =
    target && typeof target === "object" && "tagName" in target
      ? String((target as { tagName: unknown }).tagName).toLowerCase()
      : "";
  return tag === "input" || tag === "textarea" || tag === "select";
}

/** Returns the picked class index, or null if the event is not a shortcut. */
export function handleLabelKey(event: KeyEventLike, numClasses: number): number | null {
  if (event.ctrlKey || event.metaKey || event.altKey) return null;
  if (isEditingTarget(event.target)) return null;
  return labelFromKey(event.key, numClasses);
}
