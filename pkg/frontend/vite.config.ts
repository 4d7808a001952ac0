import { defineConfig } from "vite";

export default defineConfig({
  build: { outDir: "dist" },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
