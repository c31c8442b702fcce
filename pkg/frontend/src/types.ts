// Wire types mirroring the service's JSON bodies.

export interface PivotPayload {
  date: string; // YYYY-MM-DD
  value: number;
}

export interface SessionInfo {
  id: string;
  revision: number;
  dataset: string;
}

export interface DeviationResponse {
  revision: number;
  dates: string[];
  values: number[];
  suggested_pivots: PivotPayload[];
}

export interface VarReadout {
  level: number;
  horizon_date: string | null;
  log_quantile: number;
  price_quantile: number;
}

export interface Report {
  mode: string;
  lambda: number;
  seed: number;
  partial: boolean;
  rmse_base: number;
  coefficients_base: Record<string, number>;
  split?: string;
  rmse_corrected?: number;
  coefficients_corrected?: Record<string, number>;
  sigma_base_median?: number;
  sigma_corrected_median?: number;
  var?: VarReadout;
}

export interface ParamSummary {
  name: string;
  median: number;
  q25: number;
  q75: number;
  whisker_low: number;
  whisker_high: number;
}

export interface PosteriorResponse {
  revision: number;
  corrected: boolean;
  summaries: ParamSummary[];
  var: VarReadout;
}

export interface RefitResult {
  report: Report;
  revision: number;
}
