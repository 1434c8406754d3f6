// Frozen dashboard payload used by the mapping and rendering tests.

import type { DashboardPayload } from "../src/types";

export const FIXTURE_PAYLOAD: DashboardPayload = {
  patient_id: "pat-1",
  from_ms: 1_699_400_000_000,
  to_ms: 1_700_000_000_000,
  granularity: "day",
  cards: [
    {
      kind: "heart_rate",
      label: "Heart rate",
      category: "vital_parameters",
      unit: "bpm",
      latest: { value: 74.25, ts_ms: 1_699_999_000_000 },
      max: { value: 141.5, ts_ms: 1_699_700_000_000 },
      min: { value: 58.0, ts_ms: 1_699_500_000_000 },
      rule_bands: [{ low: 50, high: 120 }],
      series: [
        { bucket_start_ms: 1_699_401_600_000, value: 71.125, count: 24 },
        { bucket_start_ms: 1_699_488_000_000, value: 73.5, count: 20 },
        { bucket_start_ms: 1_699_574_400_000, value: 69.875, count: 22 },
      ],
      outliers: [{ ts_ms: 1_699_700_000_000, value: 141.5 }],
      alerts: [
        { alert_id: "alert-1", severity: "alarm", ts_ms: 1_699_700_000_000, value: 141.5 },
      ],
      notes: [
        {
          note_id: "note-1",
          author: "doctor:doc-1",
          ts_ms: 1_699_700_000_000,
          text: "spike during exercise",
          created_ms: 1_699_701_000_000,
        },
      ],
    },
    {
      kind: "gsr",
      label: "Gsr",
      category: "vital_parameters",
      unit: "µS",
      latest: { value: 2.11, ts_ms: 1_699_999_400_000 },
      max: { value: 3.4, ts_ms: 1_699_600_000_000 },
      min: { value: 1.2, ts_ms: 1_699_450_000_000 },
      rule_bands: [],
      series: [{ bucket_start_ms: 1_699_401_600_000, value: 2.0375, count: 12 }],
      outliers: [],
      alerts: [],
      notes: [],
    },
  ],
  stress: {
    unit: "index",
    series: [
      { bucket_start_ms: 1_699_999_200_000, value: 34.7 },
      { bucket_start_ms: 1_699_999_500_000, value: 41.2 },
    ],
  },
};
