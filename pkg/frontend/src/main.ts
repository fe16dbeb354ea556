import { ApiClient } from './api';
import { Panel } from './panel';
import { buildSceneModel } from './scene';
import type { SessionState } from './state';
import { Viewer } from './viewer';

const viewerHost = document.getElementById('viewer')!;
const panelHost = document.getElementById('panel')!;

const viewer = new Viewer(viewerHost);
const api = new ApiClient('');

const panel = new Panel(panelHost, api, {
  onModelLoaded(state: SessionState) {
    viewer.show(buildSceneModel(state.model, null), true);
  },
  onResult(state: SessionState) {
    if (state.lastResult) {
      viewer.show(buildSceneModel(state.model, state.lastResult));
    }
  },
});

panel.start().catch((error) => {
  panelHost.textContent =
    `backend unreachable: ${error instanceof Error ? error.message : error}. ` +
    'Start it with: tensiform serve --port 8707';
});
