import { describe, expect, it } from "vitest";

import { DEFAULT_GRANULARITY, windowFor } from "../src/windows";

const DAY = 86_400_000;
const NOW = 1_700_000_000_000;

describe("window presets", () => {
  it("last_day is a rolling 24h window ending now", () => {
    expect(windowFor("last_day", NOW)).toEqual({ fromMs: NOW - DAY, toMs: NOW });
  });

  it("last_week spans 7 days", () => {
    expect(windowFor("last_week", NOW)).toEqual({ fromMs: NOW - 7 * DAY, toMs: NOW });
  });

  it("last_month spans 30 days", () => {
    expect(windowFor("last_month", NOW)).toEqual({ fromMs: NOW - 30 * DAY, toMs: NOW });
  });

  it("presets carry a sensible default granularity", () => {
    expect(DEFAULT_GRANULARITY.last_day).toBe("hour");
    expect(DEFAULT_GRANULARITY.last_week).toBe("day");
    expect(DEFAULT_GRANULARITY.last_month).toBe("day");
  });
});
