import { GatewayClient } from './client.js';
import { tabSessionId } from './session.js';
import { mountWidget } from './widget.js';

function boot(): void {
  const root = document.getElementById('crisisbot-root');
  if (!root) {
    console.error('crisisbot: #crisisbot-root element not found');
    return;
  }
  mountWidget(root, new GatewayClient(''), tabSessionId(window.sessionStorage));
}

if (document.readyState === 'loading') {
  document.addEventListener('DOMContentLoaded', boot, { once: true });
} else {
  boot();
}
