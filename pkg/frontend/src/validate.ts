// Form validation only. All protocol encoding stays behind the HTTP API.

const MAC_RE = /^[0-9a-fA-F]{2}([:-][0-9a-fA-F]{2}){5}$/;

export function isValidMac(text: string): boolean {
  return MAC_RE.test(text.trim());
}

export function isValidIpv4(text: string): boolean {
  const parts = text.trim().split(".");
  if (parts.length !== 4) return false;
  return parts.every((p) => {
    if (!/^\d{1,3}$/.test(p)) return false;
    const v = Number(p);
    return v >= 0 && v <= 255;
  });
}

export function parseFrameType(text: string): number | null {
  const t = text.trim().toLowerCase();
  const value = t.startsWith("0x") ? parseInt(t, 16) : parseInt(t, 10);
  if (!Number.isInteger(value) || value < 0 || value > 255) return null;
  return value;
}

export interface FormErrors {
  apAddress?: string;
  reportTargetIp?: string;
  frameType?: string;
  staFilters?: string;
}

export function validateForm(fields: {
  apAddress: string;
  reportTargetIp: string;
  frameType: string;
  staFilters: string[];
}): FormErrors {
  const errors: FormErrors = {};
  if (!isValidIpv4(fields.apAddress)) {
    errors.apAddress = "enter the AP address as a dotted quad";
  }
  if (!isValidIpv4(fields.reportTargetIp)) {
    errors.reportTargetIp = "enter the report target as a dotted quad";
  }
  if (parseFrameType(fields.frameType) === null) {
    errors.frameType = "frame type must be 0..255 (hex like 0x22 works)";
  }
  if (fields.staFilters.length > 5) {
    errors.staFilters = "at most 5 STA filters";
  } else {
    const bad = fields.staFilters.find((m) => !isValidMac(m));
    if (bad !== undefined) {
      errors.staFilters = `"${bad}" is not a MAC address`;
    }
  }
  return errors;
}

export function splitFilters(text: string): string[] {
  return text
    .split(/[\s,;]+/)
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}
