import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // Source files import "./x.js" (NodeNext style); point those at the .ts
    // sources when running under vitest.
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
