/**
 * Session controller: glues the editor model to the service.
 *
 * One accepted edit maps to exactly one service call. Operations are
 * chained so at most one request is in flight per session; edits made
 * while a request runs queue up client-side in submission order.
 *
 * An edit is validated when it reaches the head of the queue, against
 * the template state every earlier outcome has settled into. That way a
 * rejection (local or 4xx) earlier in the queue cannot smuggle a
 * now-invalid edit through to the service. Edits the validator refuses
 * never leave the browser; edits the service rejects are reverted
 * locally. Both end up as the panel's inline error.
 */

import { ServiceClient, ServiceError } from "./api.js";
import type { ExplorePayload, ResultPayload, TemplateDoc } from "./api.js";
import { ResultPanelModel } from "./results.js";
import { TemplateView } from "./template.js";

export class SessionController {
  readonly panel = new ResultPanelModel();
  private tail: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly client: ServiceClient,
    readonly view: TemplateView,
  ) {}

  /** Serialize an operation behind whatever is already queued. */
  private enqueue<T>(op: () => Promise<T>): Promise<T> {
    const next = this.tail.then(op, op);
    this.tail = next.catch(() => undefined);
    return next;
  }

  open(): Promise<void> {
    return this.enqueue(async () => {
      const payload = await this.client.createSession(this.view.toDoc());
      this.view.sessionId = payload.session_id;
      this.view.confirm();
      this.panel.recordCreate(payload.stats);
    });
  }

  private sessionId(): string {
    if (!this.view.sessionId) throw new Error("session not open");
    return this.view.sessionId;
  }

  /**
   * Returns true if the edit was accepted. A client-side refusal or a
   * service rejection leaves the template as it was, records an inline
   * error, and resolves false.
   */
  addEdge(u: number, w: number): Promise<boolean> {
    return this.enqueue(async () => {
      const problem = this.view.addProblem(u, w);
      if (problem !== null) {
        this.panel.recordRejection("add", [u, w], problem);
        return false;
      }
      this.view.applyAdd(u, w);
      try {
        const payload = await this.client.addEdge(this.sessionId(), [u, w]);
        this.view.confirm();
        this.panel.recordEdit("add", [u, w], payload.stats);
        return true;
      } catch (err) {
        this.view.revertAdd(u, w);
        this.view.confirm();
        this.panel.recordRejection("add", [u, w], describe(err));
        return false;
      }
    });
  }

  removeEdge(u: number, w: number): Promise<boolean> {
    return this.enqueue(async () => {
      const problem = this.view.removeProblem(u, w);
      if (problem !== null) {
        this.panel.recordRejection("remove", [u, w], problem);
        return false;
      }
      this.view.applyRemove(u, w);
      try {
        const payload = await this.client.removeEdge(this.sessionId(), [u, w]);
        this.view.confirm();
        this.panel.recordEdit("remove", [u, w], payload.stats);
        return true;
      } catch (err) {
        this.view.revertRemove(u, w);
        this.view.confirm();
        this.panel.recordRejection("remove", [u, w], describe(err));
        return false;
      }
    });
  }

  viewResult(samples?: number): Promise<ResultPayload> {
    return this.enqueue(async () => {
      const result = await this.client.result(this.sessionId(), samples);
      this.panel.recordResult(result);
      return result;
    });
  }

  explore(maxK: number): Promise<ExplorePayload> {
    return this.enqueue(() => this.client.explore(this.view.toDoc(), maxK));
  }

  /** Round-trip check: the service's canonical echo of our template. */
  echo(): Promise<TemplateDoc> {
    return this.enqueue(async () => {
      const payload = await this.client.templateEcho(this.sessionId());
      return payload.template;
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) return err.detail;
  return err instanceof Error ? err.message : String(err);
}
