// View model for the point-and-click recorder.
//
// The model never simulates transitions: every scene it holds came from
// the server, and a submitted action only advances the view when the
// server answered feasible=true.

import type {
  ActionPayload,
  ActionResponse,
  ExplanationRecord,
  SceneJson,
  SessionView,
  TrayOp,
} from './types.js';

export type Stage = 'pick-object' | 'pick-goal' | 'pick-orientation' | 'confirm';

export interface HistoryEntry {
  action: ActionPayload;
  reward: number;
  goalsFilled: number;
}

export interface ViewModel {
  sessionId: string | null;
  view: SessionView | null;
  stage: Stage;
  pending: ActionPayload;
  banner: string | null;
  history: HistoryEntry[];
  finished: boolean;
  recordedPairs: number | null;
  showExplanation: boolean;
  explanation: ExplanationRecord | null;
}

export function initialModel(): ViewModel {
  return {
    sessionId: null,
    view: null,
    stage: 'pick-object',
    pending: {},
    banner: null,
    history: [],
    finished: false,
    recordedPairs: null,
    showExplanation: false,
    explanation: null,
  };
}

export function isDishwasher(scene: SceneJson | undefined | null): boolean {
  return !!scene && scene.trays !== null;
}

export function startSession(vm: ViewModel, view: SessionView): void {
  vm.sessionId = view.session_id;
  vm.view = view;
  vm.stage = 'pick-object';
  vm.pending = {};
  vm.banner = null;
  vm.history = [];
  vm.finished = false;
  vm.recordedPairs = null;
  vm.explanation = null;
}

/** Click on object node i; legal only while picking an object. */
export function clickObject(vm: ViewModel, index: number): boolean {
  if (vm.stage !== 'pick-object' || vm.finished) return false;
  vm.pending = { object: index };
  vm.stage = 'pick-goal';
  vm.banner = null;
  return true;
}

/** Click on goal node j after an object is pending. */
export function clickGoal(vm: ViewModel, index: number): boolean {
  if (vm.stage !== 'pick-goal' || vm.pending.object == null) return false;
  vm.pending.goal = index;
  vm.stage = isDishwasher(vm.view?.scene) ? 'pick-orientation' : 'confirm';
  return true;
}

/** Pick one of the six orientations (dishwasher only). */
export function clickOrientation(vm: ViewModel, code: number): boolean {
  if (vm.stage !== 'pick-orientation') return false;
  if (!Number.isInteger(code) || code < 0 || code > 5) return false;
  vm.pending.orientation = code;
  vm.pending.tray_op = 'noop';
  vm.stage = 'confirm';
  return true;
}

/** Tray toggles skip the object/goal stages entirely. */
export function clickTrayToggle(vm: ViewModel, op: TrayOp): boolean {
  if (vm.finished || op === 'noop') return false;
  vm.pending = { tray_op: op };
  vm.stage = 'confirm';
  return true;
}

export function clearPending(vm: ViewModel): void {
  vm.pending = {};
  vm.stage = 'pick-object';
}

export function pendingAction(vm: ViewModel): ActionPayload | null {
  if (vm.stage !== 'confirm') return null;
  return vm.pending;
}

/** Fold the server's answer into the model; returns whether it executed. */
export function applyActionResponse(vm: ViewModel, resp: ActionResponse): boolean {
  if (!resp.feasible) {
    // keep the stage open so the demonstrator can adjust the selection
    vm.banner = resp.reason;
    return false;
  }
  vm.view = resp;
  vm.history.push({
    action: vm.pending,
    reward: resp.reward,
    goalsFilled: resp.goals_filled,
  });
  vm.pending = {};
  vm.stage = 'pick-object';
  vm.banner = null;
  vm.explanation = null;
  return true;
}

export function applyFinish(vm: ViewModel, pairs: number): void {
  vm.finished = true;
  vm.recordedPairs = pairs;
}

export function setNetworkError(vm: ViewModel, message: string): void {
  // no local state is rolled back; the user may simply retry
  vm.banner = `network error: ${message} (retry)`;
}

export function stagePrompt(vm: ViewModel): string {
  if (vm.finished) return `episode saved (${vm.recordedPairs} pairs)`;
  if (vm.view?.done) return 'all goals filled: press Finish to save the episode';
  switch (vm.stage) {
    case 'pick-object':
      return 'click the object to move (or toggle a tray)';
    case 'pick-goal':
      return 'click the goal to place it in';
    case 'pick-orientation':
      return 'choose one of the six placement orientations';
    case 'confirm':
      return 'confirm the move';
  }
}
