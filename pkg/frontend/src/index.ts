export { ServiceClient, ServiceError } from "./api.js";
export type {
  CreatePayload,
  EventsPayload,
  ExplorePayload,
  ResultPayload,
  SessionStats,
  StatsPayload,
  TemplateDoc,
} from "./api.js";
export { forceLayout } from "./layout.js";
export { ResultPanelModel } from "./results.js";
export type { InlineError, RevisionRow } from "./results.js";
export { SessionController } from "./session.js";
export { TemplateView } from "./template.js";
export { mountApp } from "./app.js";
