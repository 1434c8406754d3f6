// Card view models: a thin, lossless mapping from payload cards to what
// the DOM shows. Every number stays exactly as the server sent it; the
// dashboard does no analytics of its own.

import type { DashboardCard, DashboardPayload, StressSeries } from "./types";

export interface CardViewModel {
  kind: string;
  label: string;
  unit: string;
  latestText: string;
  latestWhen: string;
  highestText: string;
  highestTsMs: number;
  seriesPoints: { x: number; y: number }[];
  outlierPoints: { x: number; y: number }[];
  bands: { low: number; high: number }[];
  alertBadges: { alertId: string; severity: string; valueText: string }[];
  notes: { author: string; text: string; whenText: string }[];
  canAnnotate: boolean;
}

export function formatInstant(tsMs: number): string {
  return new Date(tsMs).toISOString().replace("T", " ").slice(0, 16) + " UTC";
}

export function toCardViewModel(card: DashboardCard): CardViewModel {
  return {
    kind: card.kind,
    label: card.label,
    unit: card.unit,
    latestText: String(card.latest.value),
    latestWhen: formatInstant(card.latest.ts_ms),
    highestText: String(card.max.value),
    highestTsMs: card.max.ts_ms,
    seriesPoints: card.series.map((p) => ({ x: p.bucket_start_ms, y: p.value })),
    outlierPoints: card.outliers.map((p) => ({ x: p.ts_ms, y: p.value })),
    bands: card.rule_bands.map((b) => ({ low: b.low, high: b.high })),
    alertBadges: card.alerts.map((a) => ({
      alertId: a.alert_id,
      severity: a.severity,
      valueText: String(a.value),
    })),
    notes: card.notes.map((n) => ({
      author: n.author,
      text: n.text,
      whenText: formatInstant(n.ts_ms),
    })),
    canAnnotate: card.series.length > 0,
  };
}

export function toCardViewModels(payload: DashboardPayload): CardViewModel[] {
  return payload.cards.map(toCardViewModel);
}

export function stressPoints(stress: StressSeries): { x: number; y: number }[] {
  return stress.series.map((p) => ({ x: p.bucket_start_ms, y: p.value }));
}

/** Every numeric string the card view models will put on screen. */
export function displayedNumbers(models: CardViewModel[]): string[] {
  const out: string[] = [];
  for (const model of models) {
    out.push(model.latestText, model.highestText);
    out.push(...model.alertBadges.map((a) => a.valueText));
    out.push(...model.seriesPoints.map((p) => String(p.y)));
    out.push(...model.outlierPoints.map((p) => String(p.y)));
  }
  return out;
}
