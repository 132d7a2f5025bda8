/** Wire shapes, mirrored from the server's documented JSON payloads. */

export interface WireEvent {
  seq: number;
  kind: string;
  data: Record<string, unknown>;
}

export interface ToolParam {
  name: string;
  kind: string;
  required: boolean;
  description: string;
}

export interface ToolSpec {
  name: string;
  description: string;
  time_cost: number;
  params: ToolParam[];
}

export interface TaskView {
  task_id: string;
  description: string;
  deadline: string | null;
  priority: string;
}

export interface ContactView {
  name: string;
  role: string;
  department: string;
}

export interface ScenarioView {
  scenario_id: string;
  agent_name: string;
  workday: [string, string];
  tasks: TaskView[];
  contacts: ContactView[];
}

export interface CheckpointView {
  checkpoint_id: string;
  kind: string;
  description: string;
  status: string;
}

export interface Report {
  scenario_id: string;
  tasks: {
    task_id: string;
    rule_id: string;
    completed: boolean;
    ratio: string;
    checkpoints: CheckpointView[];
  }[];
  score: { exact: string; value: number; display: string };
  counters: { steps: number; tool_calls: number };
  feedback: { checkpoint: string; feedback: string }[];
  final_clock: string;
}

export interface SessionInfo {
  session_id: string;
  scenario: ScenarioView;
  phase: string;
  hints: { tier: number; text: string; injected_at: string }[];
}
