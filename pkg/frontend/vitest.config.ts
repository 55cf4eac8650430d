import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    testTimeout: 240_000,
    hookTimeout: 120_000,
    // the session test drives a real server; keep files sequential
    fileParallelism: false,
  },
});
