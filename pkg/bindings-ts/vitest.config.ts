import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // latency assertions need the machine to themselves
    fileParallelism: false,
  },
});
