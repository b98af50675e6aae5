import { defineConfig } from "vitest/config";

// node environment: DOM tests build happy-dom windows by hand, which keeps
// the native fetch available for the live-server round trip.
export default defineConfig({
  test: {
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
