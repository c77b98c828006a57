// Typed mirrors of the service's JSON payloads.

export interface EntityJson {
  id: number;
  kind: 'block' | 'cover' | 'plate' | 'bowl';
  pose: [number, number, number];
  orientation: number;
  support: [string, number | null];
  container_box: number | null;
}

export interface GoalJson {
  id: number;
  kind: 'goal_block' | 'goal_cover' | 'goal_top' | 'goal_bottom';
  pose: [number, number, number];
  required_kind: string | null;
  required_orientation: number | null;
  filled_by: number | null;
  support_goals: number[];
  scored: boolean;
  container_box: number | null;
  tray: 'top' | 'bottom' | null;
}

export interface BoxJson {
  id: number;
  pose: [number, number, number];
  cover_goal: number;
}

export interface SceneJson {
  entities: EntityJson[];
  goals: GoalJson[];
  boxes: BoxJson[];
  trays: { top_open: boolean; bottom_open: boolean } | null;
  step_count: number;
  step_budget: number;
  episode_seed: number;
  failure_rate: number;
}

export type TrayOp = 'toggle_top' | 'toggle_bottom' | 'noop';

export interface ActionPayload {
  object?: number | null;
  goal?: number | null;
  orientation?: number | null;
  tray_op?: TrayOp | null;
}

export interface SessionView {
  session_id: string;
  status: string;
  scene: SceneJson;
  feasible_actions: ActionPayload[];
  goals_filled: number;
  goals_total: number;
  done: boolean;
}

export interface ActionResponse extends SessionView {
  feasible: boolean;
  reason: string;
  reward: number;
}

export interface ExplanationRecord {
  chosen_object: number | null;
  chosen_goal: number | null;
  top_edges: [number, number][];
  top_features: string[];
  edge_mask: number[];
  feature_mask: number[];
  converged: boolean;
}
