import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // integration tests spawn and poll a real API server
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
