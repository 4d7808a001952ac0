// Wire protocol message shapes (mirrors the server's JSON payloads).

export interface WireRequest {
  cmd: string;
  [key: string]: unknown;
}

export interface WireError {
  code: string;
  message: string;
  line?: number;
  column?: number;
  near_misses?: string[];
}

export interface WireResponse {
  status: "ok" | "error";
  session?: string;
  error?: WireError;
  [key: string]: unknown;
}

export interface AutomatonEdge {
  source: string;
  target: string;
  label: string;
  kind: "send" | "recv";
  text: string;
}

export interface AutomatonDump {
  agent: string;
  states: string[];
  initial: string;
  final: string;
  edges: AutomatonEdge[];
  infos: string[];
}

export interface LoadResponse extends WireResponse {
  agents: Record<string, { states: number; edges: number }>;
  instances: string[];
  instance_types: Record<string, string>;
  warnings: { code: string; message: string; agent: string | null }[];
  infos: { code: string; message: string }[];
}

export interface EnabledStep {
  sender: string;
  label: string;
  channel: string;
  data: Record<string, string>;
  admits: string;
  receivers: Record<string, { kind: string; label: string | null }>;
}

export interface InspectPayload {
  state: Record<string, Record<string, string>>;
  enabled: EnabledStep[];
  deadlock: boolean;
  latched_receives: string[];
  trace_length: number;
  seed: number;
}

export interface StepResponse extends WireResponse {
  stutter: boolean;
  deadlock: boolean;
  inspect: InspectPayload;
  fired?: {
    sender: string;
    label: string;
    channel: string;
    received: string[];
  };
}

export interface StepCommand {
  mode: "random" | "constrained";
  constraint?: string;
}
