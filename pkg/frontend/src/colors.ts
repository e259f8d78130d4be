// Fixed per-type palette; documents are cyan and edges inherit the
// indicator color. Must stay in sync with the server's dot export.

export const DOCUMENT_COLOR = "#00bcd4";

export const TYPE_COLORS: Record<string, string> = {
  md5: "#9c27b0",
  sha1: "#e91e63",
  sha256: "#9acd32",
  sha512: "#9e9e9e",
  filename: "#008080",
  malware: "#8b4513",
  apt: "#b57edc",
  email: "#ffd700",
  cve: "#ff0000",
  twitter: "#800000",
  phone: "#1e90ff",
  ip: "#ff8c00",
  domain: "#228b22",
  technique: "#d7c797",
};

export const INDICATOR_TYPES = Object.keys(TYPE_COLORS);

export function nodeColor(kind: "doc" | "ind", type?: string | null): string {
  if (kind === "doc") return DOCUMENT_COLOR;
  return TYPE_COLORS[type ?? ""] ?? "#777777";
}
