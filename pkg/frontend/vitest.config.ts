import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    // DOM-facing suites opt into jsdom with a per-file docblock.
    environment: 'node',
    include: ['tests/**/*.test.ts'],
  },
});
