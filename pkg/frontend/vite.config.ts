/// <reference types="vitest" />
import { defineConfig } from "vite";

export default defineConfig({
  server: {
    // the service binds 127.0.0.1:8011 by default
    proxy: { "/api": "http://127.0.0.1:8011" },
  },
  test: {
    environment: "jsdom",
  },
});
