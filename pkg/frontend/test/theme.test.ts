// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { DOCTOR_THEME, PATIENT_THEME, applyTheme, themeFor } from "../src/theme";

describe("role themes", () => {
  it("binds each role to its own palette", () => {
    expect(themeFor("patient")).toBe(PATIENT_THEME);
    expect(themeFor("doctor")).toBe(DOCTOR_THEME);
  });

  it("palettes are visually distinct on every channel", () => {
    expect(PATIENT_THEME.chrome).not.toBe(DOCTOR_THEME.chrome);
    expect(PATIENT_THEME.accent).not.toBe(DOCTOR_THEME.accent);
    expect(PATIENT_THEME.background).not.toBe(DOCTOR_THEME.background);
  });

  it("applyTheme stamps the role and CSS variables on the root", () => {
    const root = document.createElement("div");
    applyTheme(root, DOCTOR_THEME);
    expect(root.dataset.role).toBe("doctor");
    expect(root.style.getPropertyValue("--chrome")).toBe(DOCTOR_THEME.chrome);
    applyTheme(root, PATIENT_THEME);
    expect(root.dataset.role).toBe("patient");
    expect(root.style.getPropertyValue("--chrome")).toBe(PATIENT_THEME.chrome);
  });
});
