/** Wire types, mirroring the JSON the map service returns. */

export type AggregateState = "solid" | "liquid" | "undefined";

export interface SiteData {
  id: string;
  label: string;
}

export interface StoreData {
  id: string;
  name: string;
  state: AggregateState;
  site: string | null;
  multiplicity: string;
  is_experience: boolean;
  is_role: boolean;
}

export interface ActivityData {
  id: string;
  name: string;
  site: string | null;
}

export interface FlowData {
  id: string;
  source: string;
  target: string;
  state: AggregateState;
  directed: boolean;
  intensity: number | null;
  attachment: string;
  is_null_flow: boolean;
  content: string | null;
}

export interface MapData {
  name: string;
  kind: "soll" | "ist";
  is_map: boolean;
  sites: SiteData[];
  stores: StoreData[];
  activities: ActivityData[];
  flows: FlowData[];
}

export interface ConferenceEventData {
  id: string;
  channel: string;
  participants: string[];
  start: string;
  end: string | null;
  artifact: string | null;
  note: string;
}

export interface ContactEntryData {
  scheme: string;
  address: string;
}

export interface ProfileData {
  id: string;
  name: string;
  site: string;
  contacts: ContactEntryData[];
  photo: string | null;
  timezone: string | null;
  status: "available" | "busy" | "offline";
  role: string;
  skills: string[];
  current_task: string;
  current_artifact: string;
  pair_partner: string | null;
}

export interface DeviationData {
  kind: string;
  subject: string[];
  planned: number | null;
  actual: number | null;
}

export interface Snapshot {
  mode: "live" | "history";
  window: { start: string; end: string };
  map: MapData;
  active_conferences: ConferenceEventData[];
  profiles: ProfileData[];
  deviations: { deviations: DeviationData[] } | null;
}

export interface EventPayload {
  id: string;
  participants: string[];
  channel: string;
  start: string;
  end?: string;
  artifact?: string;
  note?: string;
}
