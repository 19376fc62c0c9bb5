// Pure display helpers. Numbers coming from the metrics endpoint are
// rendered through String() so the dashboard shows exactly what the API
// returned, digit for digit.

export function metricText(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  return String(value);
}

export function percent(fraction: number): string {
  return (100 * fraction).toFixed(1) + "%";
}

export function maskEndpoint(path: string): string {
  if (path.length <= 4) {
    return "•".repeat(path.length);
  }
  return path.slice(0, 4) + "•".repeat(path.length - 4);
}

export function retrainProgress(pending: number, every: number): string {
  return `${pending}/${every}`;
}

export function leaseSecondsLeft(leaseExpiresAt: string, now: Date): number {
  const expiry = Date.parse(leaseExpiresAt);
  if (Number.isNaN(expiry)) {
    return 0;
  }
  return Math.max(0, Math.round((expiry - now.getTime()) / 1000));
}

// Keyboard shortcuts: keys 1..9 vote for categories in schema order.
export function hotkeyMap(categoryNames: string[]): Map<string, string> {
  const map = new Map<string, string>();
  categoryNames.slice(0, 9).forEach((name, index) => {
    map.set(String(index + 1), name);
  });
  return map;
}
