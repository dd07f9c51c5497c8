import { ApiClient } from './api.js';
import { AnalysisView } from './analysis-view.js';
import { renderQuickStart } from './quickstart.js';
import { WizardStore } from './wizard-state.js';
import { WizardView } from './wizard-view.js';

/** Full-page overlay shown while the service cannot be reached. */
function showBanner(message: string, retry: () => void): void {
  let banner = document.getElementById('service-banner');
  if (!banner) {
    banner = document.createElement('div');
    banner.id = 'service-banner';
    document.body.appendChild(banner);
  }
  banner.textContent = '';
  const text = document.createElement('p');
  text.textContent = message;
  banner.appendChild(text);
  const button = document.createElement('button');
  button.type = 'button';
  button.textContent = 'Retry';
  button.addEventListener('click', retry);
  banner.appendChild(button);
  banner.hidden = false;
}

function hideBanner(): void {
  const banner = document.getElementById('service-banner');
  if (banner) banner.hidden = true;
}

async function boot(): Promise<void> {
  const app = document.getElementById('app');
  if (!app) return;
  const client = new ApiClient('');

  let defaults;
  try {
    defaults = await client.fetchDefaults();
  } catch {
    showBanner('The deckforge service is not reachable. Start it and retry.', () => void boot());
    return;
  }
  hideBanner();

  app.textContent = '';
  renderQuickStart(app);

  const tabs = document.createElement('div');
  tabs.className = 'page-tabs';
  const wizardTab = document.createElement('button');
  wizardTab.type = 'button';
  wizardTab.textContent = 'Setup wizard';
  const analysisTab = document.createElement('button');
  analysisTab.type = 'button';
  analysisTab.textContent = 'Analysis';
  tabs.appendChild(wizardTab);
  tabs.appendChild(analysisTab);
  app.appendChild(tabs);

  const wizardRoot = document.createElement('div');
  const analysisRoot = document.createElement('div');
  app.appendChild(wizardRoot);
  app.appendChild(analysisRoot);

  const onTransportError = () =>
    showBanner('Lost contact with the deckforge service. Retry when it is back.', () =>
      void boot(),
    );

  const store = new WizardStore(defaults.fields);
  new WizardView(wizardRoot, store, client, { onTransportError });
  new AnalysisView(analysisRoot, client, { methods: defaults.methods, onTransportError });

  const select = (which: 'wizard' | 'analysis') => {
    wizardRoot.hidden = which !== 'wizard';
    analysisRoot.hidden = which !== 'analysis';
    wizardTab.classList.toggle('active', which === 'wizard');
    analysisTab.classList.toggle('active', which === 'analysis');
  };
  wizardTab.addEventListener('click', () => select('wizard'));
  analysisTab.addEventListener('click', () => select('analysis'));
  select('wizard');
}

void boot();
