import { TraceStudio } from './app.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app element');

const studio = new TraceStudio(root);
// When the page is served by `chrv serve --ui`, the protocol lives on the
// same origin; connect straight away.
const input = document.getElementById('server-url') as HTMLInputElement | null;
if (input && window.location.protocol.startsWith('http')) {
  input.value = window.location.origin;
  void studio.connect();
}

declare global {
  interface Window {
    studio: TraceStudio;
  }
}
window.studio = studio;
