import { defineConfig } from 'vite';

// The backend runs on 8707 by default (tensiform serve); the dev server
// proxies /api so the explorer can be served from vite without CORS fuss.
export default defineConfig({
  server: {
    port: 5173,
    proxy: {
      '/api': 'http://127.0.0.1:8707',
      '/healthz': 'http://127.0.0.1:8707',
    },
  },
  build: {
    outDir: 'dist',
    sourcemap: true,
  },
});
