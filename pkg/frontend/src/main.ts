import { initApp } from './app';

const SERVICE_URL =
  new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8356';

window.addEventListener('DOMContentLoaded', () => {
  void initApp(document, SERVICE_URL);
});
