import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The integration suite boots the Python planning service once.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
