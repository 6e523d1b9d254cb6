/** Page bootstrap: connect to the service, build the store, mount the wizard. */

import { ApiClient } from "./api.js";
import { WizardStore } from "./state.js";
import { mountWizard } from "./wizard.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? "http://127.0.0.1:8571";
  const container = document.getElementById("wizard");
  if (container === null) {
    throw new Error("missing #wizard container");
  }
  container.textContent = "connecting...";

  const client = new ApiClient(baseUrl);
  try {
    const loaded = await client.fetchModel();
    const store = new WizardStore(client, loaded.model, loaded.digest, window.localStorage);
    mountWizard(container, store, client);
    await store.refresh();
  } catch (error) {
    container.textContent = `service unreachable at ${baseUrl}: ${String(error)}`;
  }
}

void boot();
