// Externalized UI strings. English is the default catalog; additional
// languages are a matter of adding a table here, since no literal user
// facing text lives in the views.

const EN: Record<string, string> = {
  "app.title": "Health telemonitoring",
  "login.email": "Email",
  "login.password": "Password",
  "login.submit": "Sign in",
  "login.registerLink": "New patient? Register here",
  "login.failed": "Invalid email or password",
  "register.title": "Patient registration",
  "register.name": "Full name",
  "register.ssn": "Social security number",
  "register.devices": "Device IDs (comma separated)",
  "register.doctor": "Your doctor",
  "register.submit": "Register",
  "register.backToLogin": "Back to sign-in",
  "register.done": "Registered. Please sign in.",
  "nav.dashboard": "Dashboard",
  "nav.doctors": "Doctors",
  "nav.devices": "Devices",
  "nav.profile": "Health profile",
  "nav.logout": "Disconnect",
  "window.last_day": "Last day",
  "window.last_week": "Last week",
  "window.last_month": "Last month",
  "granularity.hour": "Hourly",
  "granularity.day": "Daily",
  "granularity.week": "Weekly",
  "dashboard.empty": "No data in this window yet.",
  "dashboard.latest": "Latest",
  "dashboard.highest": "Highest",
  "dashboard.stress": "Stress",
  "card.annotatePlaceholder": "Note on the highest value",
  "card.annotate": "Annotate highest",
  "card.notes": "Notes",
  "card.alerts": "Alerts",
  "doctor.patients": "Your patients",
  "doctor.open": "Open dashboard",
  "manage.doctors.title": "Assigned doctors",
  "manage.doctors.add": "Add doctor",
  "manage.devices.title": "Registered devices",
  "manage.devices.add": "Add device",
  "manage.devices.idPlaceholder": "Device ID",
  "manage.devices.labelPlaceholder": "Label (optional)",
  "manage.rename": "Rename",
  "manage.remove": "Remove",
  "manage.confirmRemove": "Confirm removal",
  "profile.title": "Health profile",
  "profile.height_cm": "Height (cm)",
  "profile.weight_baseline_kg": "Baseline weight (kg)",
  "profile.allergies": "Allergies",
  "profile.conditions": "Conditions",
  "profile.emergency_contact": "Emergency contact",
  "profile.save": "Save",
  "profile.saved": "Profile updated",
  "error.retry": "Retry",
  "error.network": "Could not reach the server.",
  "error.unauthorized": "Your session is no longer valid. Please sign in again.",
};

let catalog = EN;

export function t(key: string): string {
  return catalog[key] ?? key;
}

export function setCatalog(strings: Record<string, string>): void {
  catalog = { ...EN, ...strings };
}
