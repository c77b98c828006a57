// DOM wiring: one delegated click handler over the SVG, plus the
// session/tray/finish controls. All state changes flow through model.ts
// and every scene comes from the server.

import { ApiClient, ApiError } from './api.js';
import {
  applyActionResponse,
  applyFinish,
  clearPending,
  clickGoal,
  clickObject,
  clickOrientation,
  clickTrayToggle,
  initialModel,
  isDishwasher,
  pendingAction,
  setNetworkError,
  stagePrompt,
  startSession,
} from './model.js';
import { renderBanner, renderOrientationPicker, renderScene, renderStatus } from './render.js';

const api = new ApiClient('');
const vm = initialModel();
let inFlight = false;

const app = document.getElementById('app')!;

function redraw(): void {
  const scene = vm.view?.scene;
  app.innerHTML = `
    <header>
      <h1>graphmimic demonstration recorder</h1>
      <div class="controls">
        <select id="world">
          <option value='{"family":"kblock","k":3}'>3-block stack</option>
          <option value='{"family":"kblock","k":4}'>4-block stack</option>
          <option value='{"family":"kpyramid","k":6}'>6-pyramid</option>
          <option value='{"family":"boxrearrange","k":3}'>box rearrangement</option>
          <option value='{"family":"dishwasher"}'>dishwasher 5+5</option>
        </select>
        <input id="seed" type="number" value="0" title="world seed"/>
        <button id="start">New session</button>
        <button id="finish" ${vm.sessionId && !vm.finished ? '' : 'disabled'}>Finish</button>
        <label><input id="overlay" type="checkbox" ${vm.showExplanation ? 'checked' : ''}/>explanation overlay</label>
      </div>
    </header>
    ${renderBanner(vm)}
    <div class="prompt">${stagePrompt(vm)}</div>
    ${renderStatus(vm)}
    <div id="scene">${scene ? renderScene(scene, vm) : '<p>start a session to begin</p>'}</div>
    ${renderOrientationPicker(vm)}
    <div class="actions">
      ${isDishwasher(scene) ? '<button data-tray="toggle_top">toggle top tray</button><button data-tray="toggle_bottom">toggle bottom tray</button>' : ''}
      ${vm.stage === 'confirm' ? '<button id="confirm">Confirm move</button><button id="cancel">Cancel</button>' : ''}
    </div>
    <div class="history">${vm.history.length} moves recorded</div>
  `;
}

async function submitPending(): Promise<void> {
  const action = pendingAction(vm);
  if (!action || !vm.sessionId || inFlight) return;
  inFlight = true;
  try {
    const resp = await api.submitAction(vm.sessionId, action);
    applyActionResponse(vm, resp);
  } catch (err) {
    if (err instanceof ApiError) {
      vm.banner = err.message;
    } else {
      setNetworkError(vm, err instanceof Error ? err.message : String(err));
    }
  } finally {
    inFlight = false;
    redraw();
  }
}

app.addEventListener('click', async (event) => {
  const target = event.target as HTMLElement;
  if (target.id === 'start') {
    const worldSel = document.getElementById('world') as HTMLSelectElement;
    const seed = Number((document.getElementById('seed') as HTMLInputElement).value) || 0;
    const world = { ...JSON.parse(worldSel.value), seed };
    try {
      startSession(vm, await api.createSession(world));
    } catch (err) {
      setNetworkError(vm, err instanceof Error ? err.message : String(err));
    }
    redraw();
    return;
  }
  if (target.id === 'finish' && vm.sessionId && !vm.finished) {
    try {
      const done = await api.finish(vm.sessionId);
      applyFinish(vm, done.pairs);
    } catch (err) {
      setNetworkError(vm, err instanceof Error ? err.message : String(err));
    }
    redraw();
    return;
  }
  if (target.id === 'overlay' || (target as HTMLInputElement).id === 'overlay') {
    vm.showExplanation = (target as HTMLInputElement).checked;
    redraw();
    return;
  }
  if (target.id === 'confirm') {
    await submitPending();
    return;
  }
  if (target.id === 'cancel') {
    clearPending(vm);
    redraw();
    return;
  }
  const tray = target.getAttribute('data-tray');
  if (tray === 'toggle_top' || tray === 'toggle_bottom') {
    if (clickTrayToggle(vm, tray)) await submitPending();
    return;
  }
  const objectIndex = target.getAttribute('data-object-index');
  if (objectIndex !== null) {
    clickObject(vm, Number(objectIndex));
    redraw();
    return;
  }
  const goalIndex = target.getAttribute('data-goal-index');
  if (goalIndex !== null) {
    if (clickGoal(vm, Number(goalIndex)) && vm.stage === 'confirm') {
      await submitPending();
      return;
    }
    redraw();
    return;
  }
  const orientation = target.getAttribute('data-orientation');
  if (orientation !== null) {
    if (clickOrientation(vm, Number(orientation))) await submitPending();
    return;
  }
});

redraw();
