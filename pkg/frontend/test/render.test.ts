import { describe, expect, it } from 'vitest';

import { initialModel, startSession } from '../src/model.js';
import { renderBanner, renderScene, visibleIndexing } from '../src/render.js';
import type { SceneJson, SessionView } from '../src/types.js';

function stackScene(): SceneJson {
  return {
    entities: [
      { id: 0, kind: 'block', pose: [0.3, -0.1, 0.025], orientation: 0, support: ['table', null], container_box: null },
      { id: 1, kind: 'block', pose: [0.3, -0.1, 0.075], orientation: 0, support: ['entity', 0], container_box: null },
      { id: 2, kind: 'block', pose: [0.3, 0.2, 0.025], orientation: 0, support: ['table', null], container_box: null },
    ],
    goals: [
      { id: 0, kind: 'goal_block', pose: [0.6, 0.0, 0.025], required_kind: 'block', required_orientation: null, filled_by: null, support_goals: [], scored: true, container_box: null, tray: null },
    ],
    boxes: [],
    trays: null,
    step_count: 0,
    step_budget: 4,
    episode_seed: 0,
    failure_rate: 0,
  };
}

function boxedScene(): SceneJson {
  return {
    entities: [
      { id: 0, kind: 'block', pose: [0.4, 0.0, 0.025], orientation: 0, support: ['box', 0], container_box: 0 },
      { id: 1, kind: 'cover', pose: [0.4, 0.0, 0.2], orientation: 0, support: ['goal', 0], container_box: null },
    ],
    goals: [
      { id: 0, kind: 'goal_cover', pose: [0.4, 0.0, 0.2], required_kind: 'cover', required_orientation: null, filled_by: 1, support_goals: [], scored: true, container_box: null, tray: null },
      { id: 1, kind: 'goal_block', pose: [0.4, 0.0, 0.025], required_kind: 'block', required_orientation: null, filled_by: null, support_goals: [], scored: true, container_box: 0, tray: null },
    ],
    boxes: [{ id: 0, pose: [0.4, 0.0, 0.0], cover_goal: 0 }],
    trays: null,
    step_count: 0,
    step_budget: 8,
    episode_seed: 0,
    failure_rate: 0,
  };
}

describe('renderScene', () => {
  it('draws every visible block as a clickable square', () => {
    const svg = renderScene(stackScene());
    expect(svg.match(/data-object-index/g)).toHaveLength(3);
    expect(svg.match(/data-goal-index/g)).toHaveLength(1);
    expect(svg).toContain('class="goal"');
  });

  it('hides the contents of closed boxes but shows the cover', () => {
    const scene = boxedScene();
    const idx = visibleIndexing(scene);
    expect(idx.objectIds).toEqual([1]); // the block is hidden
    expect(idx.goalIds).toEqual([0]);
    const svg = renderScene(scene);
    expect(svg.match(/data-object-index/g)).toHaveLength(1);
    expect(svg).toContain('cover');
  });

  it('draws trays with open/closed affordance', () => {
    const scene = stackScene();
    scene.trays = { top_open: true, bottom_open: false };
    const svg = renderScene(scene);
    expect(svg).toContain('tray open');
    expect(svg).toContain('tray closed');
    expect(svg).toContain('top tray (open)');
  });

  it('marks filled goals', () => {
    const scene = stackScene();
    scene.goals[0]!.filled_by = 2;
    expect(renderScene(scene)).toContain('goal filled');
  });

  it('draws explanation overlay edges when enabled', () => {
    const vm = initialModel();
    const view: SessionView = {
      session_id: 's',
      status: 'active',
      scene: stackScene(),
      feasible_actions: [],
      goals_filled: 0,
      goals_total: 1,
      done: false,
    };
    startSession(vm, view);
    vm.showExplanation = true;
    vm.explanation = {
      chosen_object: 1,
      chosen_goal: 0,
      top_edges: [[0, 1]],
      top_features: ['z'],
      edge_mask: [],
      feature_mask: [],
      converged: true,
    };
    expect(renderScene(view.scene, vm)).toContain('explain-edge');
  });
});

describe('renderBanner', () => {
  it('escapes and shows the server reason', () => {
    const vm = initialModel();
    vm.banner = 'UnsupportedGoal <evil>';
    const html = renderBanner(vm);
    expect(html).toContain('UnsupportedGoal');
    expect(html).not.toContain('<evil>');
  });

  it('renders nothing without a banner', () => {
    expect(renderBanner(initialModel())).toBe('');
  });
});
