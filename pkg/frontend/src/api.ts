// Typed client for the platform API. Errors surface as ApiError with the
// server's {code, message} body so views can mirror codes inline.

import type {
  DashboardPayload,
  DeviceInfo,
  DoctorInfo,
  PatientRef,
  ProfileView,
  RegistrationForm,
  Session,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class NetworkError extends Error {}

export interface ClientConfig {
  baseUrl: string;
  fetchImpl?: typeof fetch;
}

export class ApiClient {
  private baseUrl: string;
  private fetchImpl: typeof fetch;
  token: string | null = null;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/$/, "");
    this.fetchImpl = config.fetchImpl ?? fetch;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    query?: Record<string, string | number>,
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (query) {
      const qs = new URLSearchParams(
        Object.entries(query).map(([k, v]) => [k, String(v)]),
      );
      url += "?" + qs.toString();
    }
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;

    let response: Response;
    try {
      response = await this.fetchImpl(url, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (response.status === 204) return undefined as T;
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        (payload as { code?: string }).code ?? "unknown_error",
        (payload as { message?: string }).message ?? response.statusText,
      );
    }
    return payload as T;
  }

  // -- accounts and sessions --

  listDoctors(): Promise<DoctorInfo[]> {
    return this.request("GET", "/api/doctors");
  }

  registerPatient(form: RegistrationForm): Promise<{ patient_id: string }> {
    return this.request("POST", "/api/patients", form);
  }

  async login(email: string, password: string): Promise<Session> {
    const session = await this.request<Session>("POST", "/api/session", {
      email,
      password,
    });
    this.token = session.token;
    return session;
  }

  async logout(): Promise<void> {
    await this.request("DELETE", "/api/session");
    this.token = null;
  }

  // -- dashboard --

  dashboard(
    patientId: string,
    fromMs: number,
    toMs: number,
    granularity: string,
  ): Promise<DashboardPayload> {
    return this.request("GET", `/api/patients/${patientId}/dashboard`, undefined, {
      from_ms: fromMs,
      to_ms: toMs,
      granularity,
    });
  }

  addNote(
    patientId: string,
    kind: string,
    tsMs: number,
    text: string,
  ): Promise<{ note_id: string }> {
    return this.request("POST", `/api/patients/${patientId}/notes`, {
      kind,
      ts_ms: tsMs,
      text,
    });
  }

  ackAlert(alertId: string): Promise<{ alert_id: string; acknowledged: boolean }> {
    return this.request("POST", `/api/alerts/${alertId}/ack`);
  }

  // -- associations and devices --

  assignedDoctors(patientId: string): Promise<DoctorInfo[]> {
    return this.request("GET", `/api/patients/${patientId}/doctors`);
  }

  addDoctor(patientId: string, doctorId: string): Promise<DoctorInfo[]> {
    return this.request("POST", `/api/patients/${patientId}/doctors`, {
      doctor_id: doctorId,
    });
  }

  removeDoctor(patientId: string, doctorId: string): Promise<DoctorInfo[]> {
    return this.request("DELETE", `/api/patients/${patientId}/doctors/${doctorId}`);
  }

  devices(patientId: string): Promise<DeviceInfo[]> {
    return this.request("GET", `/api/patients/${patientId}/devices`);
  }

  addDevice(patientId: string, deviceId: string, label?: string): Promise<DeviceInfo[]> {
    return this.request("POST", `/api/patients/${patientId}/devices`, {
      device_id: deviceId,
      label: label || undefined,
    });
  }

  renameDevice(patientId: string, deviceId: string, label: string): Promise<DeviceInfo[]> {
    return this.request("PATCH", `/api/patients/${patientId}/devices/${deviceId}`, {
      label,
    });
  }

  removeDevice(patientId: string, deviceId: string): Promise<DeviceInfo[]> {
    return this.request("DELETE", `/api/patients/${patientId}/devices/${deviceId}`);
  }

  // -- profile --

  profile(patientId: string): Promise<ProfileView> {
    return this.request("GET", `/api/patients/${patientId}/profile`);
  }

  updateProfile(patientId: string, fields: Record<string, unknown>): Promise<ProfileView> {
    return this.request("PATCH", `/api/patients/${patientId}/profile`, fields);
  }

  // -- doctor side --

  doctorPatients(doctorId: string): Promise<PatientRef[]> {
    return this.request("GET", `/api/doctors/${doctorId}/patients`);
  }
}
