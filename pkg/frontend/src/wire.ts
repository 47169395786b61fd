/** Payload shapes served by the metrics REST API.
 *
 * The dashboard is a pure view layer: these types mirror the wire
 * format exactly and nothing in the UI derives numbers from them —
 * every displayed value is one of these fields verbatim.
 */

export interface WireIssues {
  open: number;
  closed: number;
  openCumulative: number;
  closedCumulative: number;
}

export interface WireSample {
  start_date: string;
  end_date: string;
  kloc: number;
  issues: WireIssues;
  density?: number | null;
  spoilage?: number;
}

export interface DashEnvelope {
  project: string;
  frequency: string;
  series: WireSample[];
  available_metrics: string[];
}

export interface ProjectDoc {
  project_id: string;
  owner: string;
  name: string;
  branch: string;
  state: string;
  requested_at: string;
  last_analyzed_at: string | null;
  failure_reason: string | null;
}

export interface ProjectListing {
  page: number;
  per_page: number;
  total: number;
  projects: ProjectDoc[];
}

export interface WireError {
  error: string;
  detail: string;
  candidates?: string[];
}
