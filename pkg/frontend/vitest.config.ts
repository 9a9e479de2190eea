import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the integration suite drives a real annotation service end to end
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
