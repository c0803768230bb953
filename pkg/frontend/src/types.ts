/** Wire types, mirroring the service's JSON field names exactly. */

export interface VnfDoc {
  id: string;
  name: string;
  role: string;
  state: string;
  vm_id: string | null;
  mgmt_ip: string | null;
  dataflow_ip: string | null;
  slice_id?: string | null;
}

export interface NsSummary {
  id: string;
  name: string;
  state: string;
}

export interface NsDoc extends NsSummary {
  state_changed_at: number;
  created_at: number;
  vnfs: VnfDoc[];
}

export interface EventFrame {
  ts: number;
  entity_kind: string;
  entity_id: string;
  event: string;
  data: Record<string, unknown>;
}

export interface MetricSampleDoc {
  vnf_id: string;
  metric: string;
  value: number;
  ts: number;
}

export interface SwapPreviewDoc {
  strategy: string;
  downtime_s: number;
  peak_resource_overlap: number;
  estimated_setup_s?: number;
}

export interface PlanDoc {
  n_enodebs: number;
  placements: [number, number][];
  covered_area_m2: number;
  estimated_setup_s: number;
  descriptor: Record<string, unknown>;
  swap_preview?: SwapPreviewDoc;
}

export interface SwapReportDoc {
  old_ns_id: string;
  new_ns_id: string;
  strategy: string;
  downtime_s: number;
  peak_resource_overlap: number;
}

export interface HostDoc {
  id: string;
  vcpus_total: number;
  vcpus_free: number;
  ram_mb_total: number;
  ram_mb_free: number;
}

export interface SliceDoc {
  f_low_hz: number;
  f_high_hz: number;
  tx_power_dbm: number;
  location: [number, number];
}

export interface InfraDoc {
  services: Record<string, string>;
  vim: {
    hosts: HostDoc[];
    networks: { cidr: string; role: string; assigned: string[] }[];
    rrhs: { id: string; attached_vnf: string | null }[];
    vm_count: number;
  };
  pool: {
    f_start_hz: number;
    f_end_hz: number;
    reuse_distance_m: number;
    slices: SliceDoc[];
  };
  clock: { mode: string; now: number };
  tasks_pending: number;
}

export interface AlarmEntry {
  alarm_id: string;
  vnf_id: string;
  rule_id?: string;
  ts: number;
  kind: string; // FIRED | DELIVERED | PARKED | DROPPED
  accepted?: boolean;
}

export interface PlanRequest {
  name: string;
  target_area_m2: number;
  cell_radius_m?: number;
  channel_bandwidth_hz?: number;
  time_model?: { mode: string };
  strategy?: string;
  old_ns_id?: string;
}
