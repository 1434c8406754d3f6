// Wire types mirroring the backend JSON payloads. The dashboard never
// derives numbers itself: everything rendered comes from these fields.

export type Role = "patient" | "doctor";

export interface Session {
  token: string;
  principal: { type: Role; id: string };
  expires_ms: number;
}

export interface SeriesPoint {
  bucket_start_ms: number;
  value: number;
  count: number;
}

export interface PointRef {
  ts_ms: number;
  value: number;
}

export interface AlertBadge {
  alert_id: string;
  severity: "warning" | "alarm";
  ts_ms: number;
  value: number;
}

export interface NoteView {
  note_id: string;
  author: string;
  ts_ms: number;
  text: string;
  created_ms: number;
}

export interface RuleBand {
  low: number;
  high: number;
}

export interface DashboardCard {
  kind: string;
  label: string;
  category: string;
  unit: string;
  latest: PointRef & { ts_ms: number };
  max: PointRef;
  min: PointRef;
  rule_bands: RuleBand[];
  series: SeriesPoint[];
  outliers: PointRef[];
  alerts: AlertBadge[];
  notes: NoteView[];
}

export interface StressSeries {
  unit: string;
  series: { bucket_start_ms: number; value: number }[];
}

export interface DashboardPayload {
  patient_id: string;
  from_ms: number;
  to_ms: number;
  granularity: string;
  cards: DashboardCard[];
  stress: StressSeries | null;
}

export interface DoctorInfo {
  doctor_id: string;
  name: string;
  specialization: string;
}

export interface DeviceInfo {
  device_id: string;
  label: string;
}

export interface PatientRef {
  patient_id: string;
  name: string;
}

export interface ProfileView {
  profile: Record<string, unknown>;
  profile_updated_ms: number | null;
}

export interface RegistrationForm {
  name: string;
  ssn: string;
  email: string;
  password: string;
  device_ids: string[];
  doctor_id: string;
}
