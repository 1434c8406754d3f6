// Role-bound color schemes. Patients and doctors get visibly different
// palettes so it is always obvious which side of the platform you are on.

import type { Role } from "./types";

export interface Theme {
  role: Role;
  chrome: string;
  accent: string;
  background: string;
  cardBorder: string;
}

export const PATIENT_THEME: Theme = {
  role: "patient",
  chrome: "#1d6fb8",
  accent: "#2a9d8f",
  background: "#f4f9ff",
  cardBorder: "#bcd6ee",
};

export const DOCTOR_THEME: Theme = {
  role: "doctor",
  chrome: "#7c3aed",
  accent: "#b45309",
  background: "#faf5ff",
  cardBorder: "#ddd0f0",
};

export function themeFor(role: Role): Theme {
  return role === "doctor" ? DOCTOR_THEME : PATIENT_THEME;
}

export function applyTheme(root: HTMLElement, theme: Theme): void {
  root.dataset.role = theme.role;
  root.style.setProperty("--chrome", theme.chrome);
  root.style.setProperty("--accent", theme.accent);
  root.style.setProperty("--background", theme.background);
  root.style.setProperty("--card-border", theme.cardBorder);
}
