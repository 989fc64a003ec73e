import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // e2e spawns the service (and builds fixtures on first run), so both
    // hooks and individual round-trip tests get generous ceilings.
    testTimeout: 120_000,
    hookTimeout: 600_000,
    // One file at a time: the e2e suite owns a fixed port.
    fileParallelism: false,
  },
});
