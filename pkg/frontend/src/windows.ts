// Window presets: rolling windows ending now.

export type WindowPreset = "last_day" | "last_week" | "last_month";

const DAY_MS = 86_400_000;

export const PRESET_SPANS_MS: Record<WindowPreset, number> = {
  last_day: DAY_MS,
  last_week: 7 * DAY_MS,
  last_month: 30 * DAY_MS,
};

export const DEFAULT_GRANULARITY: Record<WindowPreset, "hour" | "day" | "week"> = {
  last_day: "hour",
  last_week: "day",
  last_month: "day",
};

export function windowFor(preset: WindowPreset, nowMs: number): { fromMs: number; toMs: number } {
  return { fromMs: nowMs - PRESET_SPANS_MS[preset], toMs: nowMs };
}
