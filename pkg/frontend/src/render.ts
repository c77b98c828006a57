// Pure scene -> SVG string rendering (front elevation: scene y maps to
// screen x, scene z to screen height). Clickable shapes carry
// data-object-index / data-goal-index attributes; main.ts delegates.

import type { SceneJson } from './types.js';
import type { ViewModel } from './model.js';

const W = 760;
const H = 420;
const FLOOR = H - 40;
const SCALE = 640; // metres -> pixels
const BLOCK = 0.05 * SCALE;

function sx(y: number): number {
  return W / 2 + y * SCALE * 0.9;
}

function sz(z: number): number {
  return FLOOR - z * SCALE;
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export interface VisibleIndexing {
  // node order the service exposes: visible entities then visible goals
  objectIds: number[];
  goalIds: number[];
}

/** The service's visible ordering (matches action indices). */
export function visibleIndexing(scene: SceneJson): VisibleIndexing {
  const openBoxes = new Set(
    scene.boxes
      .filter((b) => {
        const goal = scene.goals.find((g) => g.id === b.cover_goal);
        return goal !== undefined && goal.filled_by === null;
      })
      .map((b) => b.id),
  );
  const visible = (containerBox: number | null) =>
    containerBox === null || openBoxes.has(containerBox);
  return {
    objectIds: scene.entities.filter((e) => visible(e.container_box)).map((e) => e.id),
    goalIds: scene.goals.filter((g) => visible(g.container_box)).map((g) => g.id),
  };
}

function entityRect(kind: string): { w: number; h: number; cls: string } {
  switch (kind) {
    case 'cover':
      return { w: BLOCK * 2.2, h: BLOCK * 0.4, cls: 'cover' };
    case 'plate':
      return { w: BLOCK * 1.4, h: BLOCK * 0.5, cls: 'plate' };
    case 'bowl':
      return { w: BLOCK * 1.1, h: BLOCK * 0.8, cls: 'bowl' };
    default:
      return { w: BLOCK, h: BLOCK, cls: 'block' };
  }
}

export function renderScene(scene: SceneJson, vm?: ViewModel): string {
  const idx = visibleIndexing(scene);
  const parts: string[] = [];
  parts.push(`<rect class="floor" x="0" y="${FLOOR}" width="${W}" height="4"/>`);

  for (const box of scene.boxes) {
    const x = sx(box.pose[1]);
    const wallH = 0.2 * SCALE;
    parts.push(
      `<path class="box" d="M ${x - BLOCK * 1.4} ${FLOOR - wallH} V ${FLOOR} H ${x + BLOCK * 1.4} V ${FLOOR - wallH}" fill="none"/>`,
    );
  }

  if (scene.trays) {
    for (const [tray, open] of [
      ['top', scene.trays.top_open],
      ['bottom', scene.trays.bottom_open],
    ] as const) {
      const z = tray === 'top' ? 0.6 : 0.3;
      const extend = open ? 0 : BLOCK * 3;
      parts.push(
        `<rect class="tray ${open ? 'open' : 'closed'}" x="${sx(0.0) + extend}" y="${sz(z) + 6}" width="${BLOCK * 9}" height="6"/>`,
        `<text class="label" x="${sx(0.0) + extend + 4}" y="${sz(z) + 26}">${tray} tray ${open ? '(open)' : '(closed)'}</text>`,
      );
    }
  }

  scene.goals.forEach((goal) => {
    const vi = idx.goalIds.indexOf(goal.id);
    if (vi < 0) return; // hidden inside a closed box
    const { w, h } = entityRect(goal.required_kind ?? 'block');
    const x = sx(goal.pose[1]) - w / 2;
    const y = sz(goal.pose[2]) - h;
    const filled = goal.filled_by !== null ? ' filled' : '';
    const selected = vm?.pending.goal === vi ? ' selected' : '';
    parts.push(
      `<rect class="goal${filled}${selected}" data-goal-index="${vi}" x="${x}" y="${y}" width="${w}" height="${h}"/>`,
    );
  });

  scene.entities.forEach((ent) => {
    const vi = idx.objectIds.indexOf(ent.id);
    if (vi < 0) return;
    const { w, h, cls } = entityRect(ent.kind);
    const x = sx(ent.pose[1]) - w / 2;
    const y = sz(ent.pose[2] - 0.025) - h; // poses are centres
    const selected = vm?.pending.object === vi ? ' selected' : '';
    parts.push(
      `<rect class="entity ${cls}${selected}" data-object-index="${vi}" x="${x}" y="${y}" width="${w}" height="${h}"/>`,
      `<text class="tag" x="${x + 2}" y="${y + h - 3}">${esc(ent.kind[0]!.toUpperCase())}${ent.id}</text>`,
    );
  });

  // read-only explanation overlay: top edges drawn between node centres
  if (vm?.showExplanation && vm.explanation) {
    const centre = (node: number): [number, number] | null => {
      const objCount = idx.objectIds.length;
      if (node < objCount) {
        const ent = scene.entities.find((e) => e.id === idx.objectIds[node]);
        return ent ? [sx(ent.pose[1]), sz(ent.pose[2])] : null;
      }
      const goal = scene.goals.find((g) => g.id === idx.goalIds[node - objCount]);
      return goal ? [sx(goal.pose[1]), sz(goal.pose[2])] : null;
    };
    for (const [a, b] of vm.explanation.top_edges) {
      const pa = centre(a);
      const pb = centre(b);
      if (pa && pb) {
        parts.push(
          `<line class="explain-edge" x1="${pa[0]}" y1="${pa[1]}" x2="${pb[0]}" y2="${pb[1]}"/>`,
        );
      }
    }
  }

  return `<svg viewBox="0 0 ${W} ${H}" width="${W}" height="${H}">${parts.join('')}</svg>`;
}

export function renderOrientationPicker(vm: ViewModel): string {
  if (vm.stage !== 'pick-orientation') return '';
  const hint =
    vm.showExplanation && vm.view
      ? requiredOrientationOfPendingGoal(vm)
      : null;
  const buttons = Array.from({ length: 6 }, (_, code) => {
    const highlight = hint === code ? ' hinted' : '';
    return `<button class="orient${highlight}" data-orientation="${code}">o${code}</button>`;
  });
  return `<div class="orientation-picker">${buttons.join('')}</div>`;
}

function requiredOrientationOfPendingGoal(vm: ViewModel): number | null {
  if (!vm.view || vm.pending.goal == null) return null;
  const idx = visibleIndexing(vm.view.scene);
  const goalId = idx.goalIds[vm.pending.goal];
  const goal = vm.view.scene.goals.find((g) => g.id === goalId);
  return goal?.required_orientation ?? null;
}

export function renderBanner(vm: ViewModel): string {
  if (!vm.banner) return '';
  return `<div class="banner" role="alert">${esc(vm.banner)}</div>`;
}

export function renderStatus(vm: ViewModel): string {
  const view = vm.view;
  if (!view) return '<div class="status">no session</div>';
  return (
    `<div class="status">goals ${view.goals_filled}/${view.goals_total}` +
    ` · step ${view.scene.step_count}/${view.scene.step_budget}` +
    `${view.done ? ' · done' : ''}</div>`
  );
}
