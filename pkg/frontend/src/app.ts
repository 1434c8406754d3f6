// Single-page dashboard app: plain DOM, no framework. One state object,
// one render pass per change, async actions tracked so tests (and the
// polling loop) can await quiescence.

import { ApiClient, ApiError, NetworkError } from "./api";
import { stressPoints, toCardViewModel } from "./cards";
import { renderChart } from "./chart";
import { t } from "./i18n";
import { applyTheme, PATIENT_THEME, themeFor, type Theme } from "./theme";
import type {
  DashboardPayload,
  DeviceInfo,
  DoctorInfo,
  PatientRef,
  ProfileView,
  RegistrationForm,
  Session,
} from "./types";
import {
  DEFAULT_GRANULARITY,
  PRESET_SPANS_MS,
  windowFor,
  type WindowPreset,
} from "./windows";

export interface AppConfig {
  baseUrl: string;
  now?: () => number;
  pollMs?: number;
  fetchImpl?: typeof fetch;
}

type View =
  | { name: "login"; error?: string; info?: string }
  | { name: "register"; doctors: DoctorInfo[]; error?: string }
  | { name: "patients"; patients: PatientRef[] }
  | { name: "dashboard"; payload: DashboardPayload; error?: string }
  | { name: "doctors"; assigned: DoctorInfo[]; all: DoctorInfo[]; error?: string }
  | { name: "devices"; devices: DeviceInfo[]; error?: string }
  | { name: "profile"; view: ProfileView; error?: string; info?: string }
  | { name: "trouble"; message: string; retry: () => void };

const PROFILE_FIELDS = [
  "height_cm",
  "weight_baseline_kg",
  "allergies",
  "conditions",
  "emergency_contact",
] as const;

export class DashboardApp {
  readonly client: ApiClient;
  session: Session | null = null;
  patientId: string | null = null;
  preset: WindowPreset = "last_week";
  granularity: "hour" | "day" | "week" = "day";
  view: View = { name: "login" };

  private root: HTMLElement;
  private doc: Document;
  private now: () => number;
  private inflight = 0;
  private idleWaiters: (() => void)[] = [];
  private confirmArmed: string | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, config: AppConfig) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.now = config.now ?? (() => Date.now());
    this.client = new ApiClient({ baseUrl: config.baseUrl, fetchImpl: config.fetchImpl });
    const pollMs = config.pollMs ?? 30_000;
    if (pollMs > 0) {
      this.pollTimer = setInterval(() => {
        if (this.view.name === "dashboard" && this.session) this.loadDashboard();
      }, pollMs);
    }
    this.render();
  }

  dispose(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
  }

  /** Resolves once every in-flight action has settled. */
  whenIdle(): Promise<void> {
    if (this.inflight === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  private track(action: () => Promise<void>): void {
    this.inflight += 1;
    action()
      .catch((err) => this.handleFailure(err))
      .finally(() => {
        this.inflight -= 1;
        if (this.inflight === 0) {
          for (const waiter of this.idleWaiters.splice(0)) waiter();
        }
      });
  }

  private handleFailure(err: unknown): void {
    if (err instanceof ApiError && err.status === 401) {
      this.session = null;
      this.client.token = null;
      this.view = { name: "login", error: t("error.unauthorized") };
    } else if (err instanceof NetworkError) {
      const failedView = this.view.name;
      const retry = () => this.reloadView(failedView);
      this.view = { name: "trouble", message: t("error.network"), retry };
    } else if (err instanceof ApiError) {
      (this.view as { error?: string }).error = `${err.code}: ${err.message}`;
    } else {
      const failedView = this.view.name;
      this.view = { name: "trouble", message: String(err), retry: () => this.reloadView(failedView) };
    }
    this.render();
  }

  private reloadView(name: View["name"]): void {
    switch (name) {
      case "dashboard":
        this.loadDashboard();
        break;
      case "doctors":
        this.openDoctors();
        break;
      case "devices":
        this.openDevices();
        break;
      case "profile":
        this.openProfile();
        break;
      case "register":
        this.openRegister();
        break;
      default:
        this.view = { name: "login" };
        this.render();
    }
  }

  private theme(): Theme {
    return this.session ? themeFor(this.session.principal.type) : PATIENT_THEME;
  }

  // -- actions ---------------------------------------------------------

  login(email: string, password: string): void {
    this.track(async () => {
      try {
        this.session = await this.client.login(email, password);
      } catch (err) {
        if (err instanceof ApiError) {
          this.view = { name: "login", error: t("login.failed") };
          this.render();
          return;
        }
        throw err;
      }
      if (this.session.principal.type === "patient") {
        this.patientId = this.session.principal.id;
        await this.fetchDashboard();
      } else {
        const patients = await this.client.doctorPatients(this.session.principal.id);
        this.view = { name: "patients", patients };
      }
      this.render();
    });
  }

  logout(): void {
    this.track(async () => {
      await this.client.logout();
      this.session = null;
      this.patientId = null;
      this.view = { name: "login" };
      this.render();
    });
  }

  openRegister(): void {
    this.track(async () => {
      const doctors = await this.client.listDoctors();
      this.view = { name: "register", doctors };
      this.render();
    });
  }

  register(form: RegistrationForm): void {
    this.track(async () => {
      try {
        await this.client.registerPatient(form);
      } catch (err) {
        if (err instanceof ApiError && this.view.name === "register") {
          this.view.error = `${err.code}: ${err.message}`;
          this.render();
          return;
        }
        throw err;
      }
      this.view = { name: "login", info: t("register.done") };
      this.render();
    });
  }

  selectPatient(patientId: string): void {
    this.patientId = patientId;
    this.loadDashboard();
  }

  setPreset(preset: WindowPreset): void {
    this.preset = preset;
    this.granularity = DEFAULT_GRANULARITY[preset];
    this.loadDashboard();
  }

  setGranularity(granularity: "hour" | "day" | "week"): void {
    this.granularity = granularity;
    this.loadDashboard();
  }

  loadDashboard(): void {
    this.track(async () => {
      await this.fetchDashboard();
      this.render();
    });
  }

  private async fetchDashboard(): Promise<void> {
    if (!this.patientId) return;
    const { fromMs, toMs } = windowFor(this.preset, this.now());
    const payload = await this.client.dashboard(
      this.patientId,
      fromMs,
      toMs,
      this.granularity,
    );
    this.view = { name: "dashboard", payload };
  }

  annotateHighest(kind: string, tsMs: number, text: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      await this.client.addNote(this.patientId, kind, tsMs, text);
      await this.fetchDashboard();
      this.render();
    });
  }

  acknowledgeAlert(alertId: string): void {
    this.track(async () => {
      await this.client.ackAlert(alertId);
      await this.fetchDashboard();
      this.render();
    });
  }

  openDoctors(): void {
    this.track(async () => {
      if (!this.patientId) return;
      const [assigned, all] = await Promise.all([
        this.client.assignedDoctors(this.patientId),
        this.client.listDoctors(),
      ]);
      this.view = { name: "doctors", assigned, all };
      this.render();
    });
  }

  addDoctor(doctorId: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      const assigned = await this.client.addDoctor(this.patientId, doctorId);
      const all = await this.client.listDoctors();
      this.view = { name: "doctors", assigned, all };
      this.render();
    });
  }

  removeDoctor(doctorId: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      const assigned = await this.client.removeDoctor(this.patientId, doctorId);
      const all = await this.client.listDoctors();
      this.view = { name: "doctors", assigned, all };
      this.render();
    });
  }

  openDevices(): void {
    this.track(async () => {
      if (!this.patientId) return;
      const devices = await this.client.devices(this.patientId);
      this.view = { name: "devices", devices };
      this.render();
    });
  }

  addDevice(deviceId: string, label: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      const devices = await this.client.addDevice(this.patientId, deviceId, label);
      this.view = { name: "devices", devices };
      this.render();
    });
  }

  renameDevice(deviceId: string, label: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      const devices = await this.client.renameDevice(this.patientId, deviceId, label);
      this.view = { name: "devices", devices };
      this.render();
    });
  }

  removeDevice(deviceId: string): void {
    this.track(async () => {
      if (!this.patientId) return;
      const devices = await this.client.removeDevice(this.patientId, deviceId);
      this.view = { name: "devices", devices };
      this.render();
    });
  }

  openProfile(): void {
    this.track(async () => {
      if (!this.patientId) return;
      const view = await this.client.profile(this.patientId);
      this.view = { name: "profile", view };
      this.render();
    });
  }

  saveProfile(fields: Record<string, unknown>): void {
    this.track(async () => {
      if (!this.patientId) return;
      const view = await this.client.updateProfile(this.patientId, fields);
      this.view = { name: "profile", view, info: t("profile.saved") };
      this.render();
    });
  }

  // -- rendering ----------------------------------------------------------

  render(): void {
    applyTheme(this.root, this.theme());
    this.root.textContent = "";
    const header = this.el("header", { class: "app-header" });
    header.appendChild(this.el("h1", { text: t("app.title") }));
    if (this.session) header.appendChild(this.renderNav());
    this.root.appendChild(header);

    const main = this.el("main", { class: `view-${this.view.name}` });
    switch (this.view.name) {
      case "login":
        main.appendChild(this.renderLogin(this.view));
        break;
      case "register":
        main.appendChild(this.renderRegister(this.view));
        break;
      case "patients":
        main.appendChild(this.renderPatients(this.view));
        break;
      case "dashboard":
        main.appendChild(this.renderDashboard(this.view.payload));
        break;
      case "doctors":
        main.appendChild(this.renderDoctors(this.view));
        break;
      case "devices":
        main.appendChild(this.renderDevices(this.view));
        break;
      case "profile":
        main.appendChild(this.renderProfile(this.view));
        break;
      case "trouble":
        main.appendChild(this.renderTrouble(this.view));
        break;
    }
    this.root.appendChild(main);
  }

  private el(
    tag: string,
    opts: { class?: string; text?: string; testid?: string; attrs?: Record<string, string> } = {},
  ): HTMLElement {
    const element = this.doc.createElement(tag);
    if (opts.class) element.className = opts.class;
    if (opts.text !== undefined) element.textContent = opts.text;
    if (opts.testid) element.setAttribute("data-testid", opts.testid);
    for (const [key, value] of Object.entries(opts.attrs ?? {})) {
      element.setAttribute(key, value);
    }
    return element;
  }

  private button(label: string, testid: string, onClick: () => void): HTMLButtonElement {
    const button = this.el("button", { text: label, testid }) as HTMLButtonElement;
    button.addEventListener("click", onClick);
    return button;
  }

  private input(testid: string, placeholder: string, type = "text"): HTMLInputElement {
    const input = this.el("input", {
      testid,
      attrs: { placeholder, type },
    }) as HTMLInputElement;
    return input;
  }

  private renderNav(): HTMLElement {
    const nav = this.el("nav", { class: "app-nav" });
    if (this.session?.principal.type === "patient") {
      nav.appendChild(this.button(t("nav.dashboard"), "nav-dashboard", () => this.loadDashboard()));
      nav.appendChild(this.button(t("nav.doctors"), "nav-doctors", () => this.openDoctors()));
      nav.appendChild(this.button(t("nav.devices"), "nav-devices", () => this.openDevices()));
      nav.appendChild(this.button(t("nav.profile"), "nav-profile", () => this.openProfile()));
    }
    nav.appendChild(this.button(t("nav.logout"), "nav-logout", () => this.logout()));
    return nav;
  }

  private renderLogin(view: { error?: string; info?: string }): HTMLElement {
    const form = this.el("section", { class: "login" });
    if (view.info) form.appendChild(this.el("p", { class: "info", text: view.info }));
    if (view.error)
      form.appendChild(this.el("p", { class: "error", text: view.error, testid: "login-error" }));
    const email = this.input("login-email", t("login.email"), "email");
    const password = this.input("login-password", t("login.password"), "password");
    form.appendChild(email);
    form.appendChild(password);
    form.appendChild(
      this.button(t("login.submit"), "login-submit", () => this.login(email.value, password.value)),
    );
    form.appendChild(
      this.button(t("login.registerLink"), "login-register-link", () => this.openRegister()),
    );
    return form;
  }

  private renderRegister(view: { doctors: DoctorInfo[]; error?: string }): HTMLElement {
    const form = this.el("section", { class: "register" });
    form.appendChild(this.el("h2", { text: t("register.title") }));
    if (view.error)
      form.appendChild(this.el("p", { class: "error", text: view.error, testid: "register-error" }));
    const name = this.input("register-name", t("register.name"));
    const ssn = this.input("register-ssn", t("register.ssn"));
    const email = this.input("register-email", t("login.email"), "email");
    const password = this.input("register-password", t("login.password"), "password");
    const devices = this.input("register-devices", t("register.devices"));
    const doctor = this.el("select", { testid: "register-doctor" }) as HTMLSelectElement;
    for (const d of view.doctors) {
      const option = this.el("option", {
        text: `${d.name} (${d.specialization})`,
        attrs: { value: d.doctor_id },
      });
      doctor.appendChild(option);
    }
    for (const field of [name, ssn, email, password, devices, doctor]) form.appendChild(field);
    form.appendChild(
      this.button(t("register.submit"), "register-submit", () =>
        this.register({
          name: name.value,
          ssn: ssn.value,
          email: email.value,
          password: password.value,
          device_ids: devices.value.split(",").map((s) => s.trim()).filter(Boolean),
          doctor_id: doctor.value,
        }),
      ),
    );
    form.appendChild(
      this.button(t("register.backToLogin"), "register-back", () => {
        this.view = { name: "login" };
        this.render();
      }),
    );
    return form;
  }

  private renderPatients(view: { patients: PatientRef[] }): HTMLElement {
    const section = this.el("section", { class: "patients" });
    section.appendChild(this.el("h2", { text: t("doctor.patients") }));
    const list = this.el("ul", { testid: "patient-list" });
    for (const patient of view.patients) {
      const item = this.el("li", { text: `${patient.name} ` });
      item.appendChild(
        this.button(t("doctor.open"), `open-${patient.patient_id}`, () =>
          this.selectPatient(patient.patient_id),
        ),
      );
      list.appendChild(item);
    }
    section.appendChild(list);
    return section;
  }

  private renderDashboard(payload: DashboardPayload): HTMLElement {
    const section = this.el("section", { class: "dashboard" });

    const controls = this.el("div", { class: "window-controls" });
    for (const preset of Object.keys(PRESET_SPANS_MS) as WindowPreset[]) {
      const button = this.button(t(`window.${preset}`), `preset-${preset}`, () =>
        this.setPreset(preset),
      );
      if (preset === this.preset) button.classList.add("active");
      controls.appendChild(button);
    }
    for (const granularity of ["hour", "day", "week"] as const) {
      const button = this.button(t(`granularity.${granularity}`), `granularity-${granularity}`, () =>
        this.setGranularity(granularity),
      );
      if (granularity === this.granularity) button.classList.add("active");
      controls.appendChild(button);
    }
    section.appendChild(controls);

    if (payload.cards.length === 0) {
      section.appendChild(
        this.el("p", { class: "empty", text: t("dashboard.empty"), testid: "dashboard-empty" }),
      );
      return section;
    }

    const grid = this.el("div", { class: "card-grid" });
    for (const card of payload.cards) {
      grid.appendChild(this.renderCard(card));
    }
    if (payload.stress) {
      const stressCard = this.el("article", { class: "card stress-card", testid: "card-stress" });
      stressCard.appendChild(this.el("h3", { text: t("dashboard.stress") }));
      stressCard.appendChild(
        renderChart(
          this.doc,
          { seriesPoints: stressPoints(payload.stress), outlierPoints: [], bands: [] },
          this.theme(),
        ),
      );
      grid.appendChild(stressCard);
    }
    section.appendChild(grid);
    return section;
  }

  private renderCard(card: DashboardPayload["cards"][number]): HTMLElement {
    const model = toCardViewModel(card);
    const article = this.el("article", { class: "card", testid: `card-${model.kind}` });
    article.appendChild(this.el("h3", { text: model.label }));
    const latest = this.el("p", { class: "latest" });
    latest.appendChild(this.el("span", { text: `${t("dashboard.latest")}: ` }));
    latest.appendChild(
      this.el("strong", { text: model.latestText, testid: `latest-${model.kind}` }),
    );
    latest.appendChild(this.el("span", { text: ` ${model.unit} (${model.latestWhen})` }));
    article.appendChild(latest);
    article.appendChild(
      renderChart(this.doc, {
        seriesPoints: model.seriesPoints,
        outlierPoints: model.outlierPoints,
        bands: model.bands,
      }, this.theme()),
    );

    for (const badge of model.alertBadges) {
      const chip = this.el("span", {
        class: `alert-badge ${badge.severity}`,
        text: `${badge.severity}: ${badge.valueText}`,
        testid: `alert-${badge.alertId}`,
      });
      chip.addEventListener("click", () => this.acknowledgeAlert(badge.alertId));
      article.appendChild(chip);
    }

    const highest = this.el("p", { class: "highest" });
    highest.appendChild(this.el("span", { text: `${t("dashboard.highest")}: ` }));
    highest.appendChild(
      this.el("strong", { text: model.highestText, testid: `highest-${model.kind}` }),
    );
    article.appendChild(highest);

    const noteInput = this.input(`note-input-${model.kind}`, t("card.annotatePlaceholder"));
    const noteButton = this.button(t("card.annotate"), `annotate-${model.kind}`, () => {
      if (noteInput.value) this.annotateHighest(model.kind, model.highestTsMs, noteInput.value);
    });
    if (!model.canAnnotate) noteButton.disabled = true;
    article.appendChild(noteInput);
    article.appendChild(noteButton);

    if (model.notes.length > 0) {
      const list = this.el("ul", { class: "notes", testid: `notes-${model.kind}` });
      for (const note of model.notes) {
        list.appendChild(
          this.el("li", { text: `${note.author} @ ${note.whenText}: ${note.text}` }),
        );
      }
      article.appendChild(list);
    }
    return article;
  }

  /** Two-step removal: the first click arms, the second confirms. */
  private confirmable(key: string, label: string, testid: string, action: () => void): HTMLButtonElement {
    const armed = this.confirmArmed === key;
    const button = this.button(armed ? t("manage.confirmRemove") : label, testid, () => {
      if (this.confirmArmed === key) {
        this.confirmArmed = null;
        action();
      } else {
        this.confirmArmed = key;
        this.render();
      }
    });
    if (armed) button.classList.add("armed");
    return button;
  }

  private renderDoctors(view: { assigned: DoctorInfo[]; all: DoctorInfo[]; error?: string }): HTMLElement {
    const section = this.el("section", { class: "manage-doctors" });
    section.appendChild(this.el("h2", { text: t("manage.doctors.title") }));
    if (view.error)
      section.appendChild(this.el("p", { class: "error", text: view.error, testid: "doctors-error" }));
    const list = this.el("ul", { testid: "doctor-list" });
    for (const doctor of view.assigned) {
      const item = this.el("li", { text: `${doctor.name} (${doctor.specialization}) ` });
      item.setAttribute("data-doctor", doctor.doctor_id);
      item.appendChild(
        this.confirmable(
          `doctor:${doctor.doctor_id}`,
          t("manage.remove"),
          `remove-doctor-${doctor.doctor_id}`,
          () => this.removeDoctor(doctor.doctor_id),
        ),
      );
      list.appendChild(item);
    }
    section.appendChild(list);

    const assignedIds = new Set(view.assigned.map((d) => d.doctor_id));
    const select = this.el("select", { testid: "doctor-select" }) as HTMLSelectElement;
    for (const doctor of view.all.filter((d) => !assignedIds.has(d.doctor_id))) {
      select.appendChild(
        this.el("option", {
          text: `${doctor.name} (${doctor.specialization})`,
          attrs: { value: doctor.doctor_id },
        }),
      );
    }
    section.appendChild(select);
    section.appendChild(
      this.button(t("manage.doctors.add"), "add-doctor", () => {
        if (select.value) this.addDoctor(select.value);
      }),
    );
    return section;
  }

  private renderDevices(view: { devices: DeviceInfo[]; error?: string }): HTMLElement {
    const section = this.el("section", { class: "manage-devices" });
    section.appendChild(this.el("h2", { text: t("manage.devices.title") }));
    if (view.error)
      section.appendChild(this.el("p", { class: "error", text: view.error, testid: "devices-error" }));
    const list = this.el("ul", { testid: "device-list" });
    for (const device of view.devices) {
      const item = this.el("li", {});
      item.setAttribute("data-device", device.device_id);
      item.appendChild(
        this.el("span", { text: `${device.device_id}: `, class: "device-id" }),
      );
      item.appendChild(
        this.el("span", { text: device.label, class: "device-label", testid: `label-${device.device_id}` }),
      );
      const renameInput = this.input(`rename-input-${device.device_id}`, device.label);
      item.appendChild(renameInput);
      item.appendChild(
        this.button(t("manage.rename"), `rename-${device.device_id}`, () => {
          if (renameInput.value) this.renameDevice(device.device_id, renameInput.value);
        }),
      );
      item.appendChild(
        this.confirmable(
          `device:${device.device_id}`,
          t("manage.remove"),
          `remove-device-${device.device_id}`,
          () => this.removeDevice(device.device_id),
        ),
      );
      list.appendChild(item);
    }
    section.appendChild(list);

    const idInput = this.input("device-id-input", t("manage.devices.idPlaceholder"));
    const labelInput = this.input("device-label-input", t("manage.devices.labelPlaceholder"));
    section.appendChild(idInput);
    section.appendChild(labelInput);
    section.appendChild(
      this.button(t("manage.devices.add"), "add-device", () => {
        if (idInput.value) this.addDevice(idInput.value, labelInput.value);
      }),
    );
    return section;
  }

  private renderProfile(view: { view: ProfileView; error?: string; info?: string }): HTMLElement {
    const section = this.el("section", { class: "profile" });
    section.appendChild(this.el("h2", { text: t("profile.title") }));
    if (view.info) section.appendChild(this.el("p", { class: "info", text: view.info, testid: "profile-info" }));
    if (view.error)
      section.appendChild(this.el("p", { class: "error", text: view.error, testid: "profile-error" }));
    const inputs: Record<string, HTMLInputElement> = {};
    for (const field of PROFILE_FIELDS) {
      const wrapper = this.el("label", { text: t(`profile.${field}`) });
      const input = this.input(`profile-${field}`, "");
      const current = view.view.profile[field];
      if (current !== undefined && current !== null) input.value = String(current);
      inputs[field] = input;
      wrapper.appendChild(input);
      section.appendChild(wrapper);
    }
    section.appendChild(
      this.button(t("profile.save"), "profile-save", () => {
        const fields: Record<string, unknown> = {};
        for (const [name, input] of Object.entries(inputs)) {
          if (input.value === "") continue;
          fields[name] =
            name === "height_cm" || name === "weight_baseline_kg"
              ? Number(input.value)
              : input.value;
        }
        this.saveProfile(fields);
      }),
    );
    return section;
  }

  private renderTrouble(view: { message: string; retry: () => void }): HTMLElement {
    const section = this.el("section", { class: "trouble" });
    section.appendChild(this.el("p", { class: "error", text: view.message, testid: "trouble-message" }));
    section.appendChild(this.button(t("error.retry"), "retry", view.retry));
    return section;
  }
}

export function mountApp(root: HTMLElement, config: AppConfig): DashboardApp {
  return new DashboardApp(root, config);
}
