import { defineConfig } from "vitest/config";

// Everything under these prefixes is proxied to the session service during
// `npm run dev`; start it with `ontocohort serve --data <bundle>`.
const SERVICE = "http://127.0.0.1:8000";
const API_PREFIXES = ["/session", "/filter", "/augment", "/nodes", "/save", "/reset"];

const proxy = Object.fromEntries(API_PREFIXES.map((p) => [p, SERVICE]));

export default defineConfig({
  server: { proxy },
  preview: { proxy },
  test: {
    environment: "jsdom",
  },
});
